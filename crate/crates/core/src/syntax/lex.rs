use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(super) enum Tok {
    /// Magnitude of an integer literal; the sign is handled by the parser.
    Num(u64),
    Ident(String),
    Var(String),
    Keyword(&'static str),
    /// Punctuation and operators.
    Sym(&'static str),
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            Self::Num(n) => write!(f, "`{n}`"),
            Self::Ident(x) => write!(f, "`{x}`"),
            Self::Var(x) => write!(f, "`${x}`"),
            Self::Keyword(k) | Self::Sym(k) => write!(f, "`{k}`"),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "if", "then", "elif", "else", "end", "as", "reduce", "foreach", "def", "and", "or",
];

// longest first, so that `|=` wins over `|`
const SYMBOLS: &[&str] = &[
    "|=", "==", "!=", "<=", ">=", "|", ",", "<", ">", "+", "-", "*", "/", "%", "(", ")", "[",
    "]", ".", "?", ";", ":",
];

/// 1-based line and column.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

/// Tokens with their start positions, plus the position just past the input.
pub(super) fn lex(text: &str) -> Result<(Vec<(Tok, Pos)>, Pos), ParseError> {
    let mut toks = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut rest = text;

    while let Some(c) = rest.chars().next() {
        let pos = Pos { line, col };
        let len = if c == '\n' {
            line += 1;
            col = 0;
            1
        } else if c.is_whitespace() {
            c.len_utf8()
        } else if c == '#' {
            rest.find('\n').unwrap_or(rest.len())
        } else if c.is_ascii_digit() {
            let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            let n = rest[..end]
                .parse::<u64>()
                .ok()
                .filter(|n| *n <= 1 << 63)
                .ok_or_else(|| ParseError::new(pos, "integer literal out of range"))?;
            toks.push((Tok::Num(n), pos));
            end
        } else if c == '$' {
            let name = ident(&rest[1..]);
            if name.is_empty() {
                return Err(ParseError::new(pos, "expected variable name after `$`"));
            }
            toks.push((Tok::Var(name.to_string()), pos));
            1 + name.len()
        } else if c.is_ascii_alphabetic() || c == '_' {
            let name = ident(rest);
            match KEYWORDS.iter().find(|k| **k == name) {
                Some(k) => toks.push((Tok::Keyword(k), pos)),
                None => toks.push((Tok::Ident(name.to_string()), pos)),
            }
            name.len()
        } else if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            toks.push((Tok::Sym(sym), pos));
            sym.len()
        } else {
            return Err(ParseError::new(pos, format!("unexpected character `{c}`")));
        };
        col += rest[..len].chars().count();
        rest = &rest[len..];
    }
    Ok((toks, Pos { line, col }))
}

fn ident(s: &str) -> &str {
    let end = s
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(s.len());
    if s.starts_with(|c: char| c.is_ascii_digit()) {
        ""
    } else {
        &s[..end]
    }
}
