//! Reading values from their textual form.

use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct DecodeError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Parse exactly one value, surrounded by optional whitespace.
pub fn decode_value(text: &str) -> Result<Value, DecodeError> {
    let mut d = Decoder::new(text);
    d.skip_ws();
    let v = d.value()?;
    d.skip_ws();
    if d.rest().is_empty() {
        Ok(v)
    } else {
        Err(d.error("trailing characters after value"))
    }
}

/// Parse a whitespace-separated sequence of values.
pub fn decode_values(text: &str) -> Values<'_> {
    Values(Decoder::new(text), false)
}

/// Iterator returned by [`decode_values`]; stops after the first error.
pub struct Values<'a>(Decoder<'a>, bool);

impl Iterator for Values<'_> {
    type Item = Result<Value, DecodeError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.1 {
            return None;
        }
        self.0.skip_ws();
        if self.0.rest().is_empty() {
            return None;
        }
        let r = self.0.value().and_then(|v| match self.0.rest().chars().next() {
            Some(c) if !c.is_whitespace() && !"[]".contains(c) => Err(self.0.error("expected whitespace between values")),
            _ => Ok(v),
        });
        self.1 = r.is_err();
        Some(r)
    }
}

struct Decoder<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Decoder<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn error(&self, message: impl Into<String>) -> DecodeError {
        let before = &self.text[..self.pos];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
        DecodeError { line, col, message: message.into() }
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, c: char) -> bool {
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    /// A value without surrounding whitespace.
    fn value(&mut self) -> Result<Value, DecodeError> {
        let mut stack: Vec<Vec<Value>> = Vec::new();
        loop {
            let mut v = if self.eat('[') {
                self.skip_ws();
                if self.eat(']') {
                    Value::from_vec(Vec::new())
                } else {
                    stack.push(Vec::new());
                    continue;
                }
            } else {
                self.scalar()?
            };
            // close as many arrays as the input finishes here
            loop {
                let Some(top) = stack.last_mut() else {
                    return Ok(v);
                };
                top.push(v);
                self.skip_ws();
                if self.eat(',') {
                    self.skip_ws();
                    break;
                } else if self.eat(']') {
                    v = Value::from_vec(stack.pop().expect("nonempty stack"));
                } else {
                    return Err(self.error("expected `,` or `]`"));
                }
            }
        }
    }

    fn scalar(&mut self) -> Result<Value, DecodeError> {
        let rest = self.rest();
        let word_len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == '+' || c == '.'))
            .unwrap_or(rest.len());
        let word = &rest[..word_len];
        let v = match word {
            "null" => Value::Null,
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            "" => return Err(self.error(match rest.chars().next() {
                Some(c) => format!("unexpected character `{c}`"),
                None => "unexpected end of input".to_string(),
            })),
            _ => {
                let digits = word.strip_prefix('-').unwrap_or(word);
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(self.error(format!("invalid value `{word}`")));
                }
                match word.parse::<i64>() {
                    Ok(n) => Value::Int(n),
                    Err(_) => return Err(self.error(format!("integer `{word}` out of range"))),
                }
            }
        };
        self.pos += word_len;
        Ok(v)
    }
}
