use super::lex::{lex, Pos, Tok};
use super::{ComplexOp, Definition, Filter, FoldKind};
use crate::value::CartesianOp;
use std::collections::HashSet;

/// Syntax error with a 1-based line:column position.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub(super) fn new(pos: Pos, message: impl Into<String>) -> Self {
        Self {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

/// Names that can be neither defined nor used as parameters.
const RESERVED: &[&str] = &["empty"];

#[derive(Copy, Clone, PartialEq, Eq)]
enum Assoc {
    Left,
    Right,
    None,
}

#[derive(Copy, Clone)]
enum BinOp {
    Complex(ComplexOp),
    Cartesian(CartesianOp),
}

impl BinOp {
    fn from_tok(tok: &Tok) -> Option<Self> {
        use CartesianOp::*;
        let op = match tok {
            Tok::Sym("|") => Self::Complex(ComplexOp::Pipe),
            Tok::Sym(",") => Self::Complex(ComplexOp::Comma),
            Tok::Sym("|=") => Self::Complex(ComplexOp::Update),
            Tok::Keyword("or") => Self::Complex(ComplexOp::Or),
            Tok::Keyword("and") => Self::Complex(ComplexOp::And),
            Tok::Sym(s) => Self::Cartesian(match *s {
                "==" => Eq,
                "!=" => Ne,
                "<" => Lt,
                "<=" => Le,
                ">" => Gt,
                ">=" => Ge,
                "+" => Add,
                "-" => Sub,
                "*" => Mul,
                "/" => Div,
                "%" => Rem,
                _ => return None,
            }),
            _ => return None,
        };
        Some(op)
    }

    /// Precedence (higher binds tighter) and associativity.
    fn info(self) -> (u8, Assoc) {
        use CartesianOp::*;
        match self {
            Self::Complex(ComplexOp::Pipe) => (1, Assoc::Right),
            Self::Complex(ComplexOp::Comma) => (2, Assoc::Left),
            Self::Complex(ComplexOp::Update) => (3, Assoc::Right),
            Self::Complex(ComplexOp::Or) => (4, Assoc::Right),
            Self::Complex(ComplexOp::And) => (5, Assoc::Right),
            Self::Cartesian(Eq | Ne) => (6, Assoc::None),
            Self::Cartesian(Lt | Le | Gt | Ge) => (7, Assoc::None),
            Self::Cartesian(Add | Sub) => (8, Assoc::Left),
            Self::Cartesian(Mul | Div) => (9, Assoc::Left),
            Self::Cartesian(Rem) => (10, Assoc::Left),
        }
    }

    fn build(self, l: Filter, r: Filter) -> Filter {
        match self {
            Self::Complex(op) => Filter::complex(op, l, r),
            Self::Cartesian(op) => Filter::cartesian(op, l, r),
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    end: Pos,
}

type Result<T, E = ParseError> = std::result::Result<T, E>;

impl Parser {
    fn new(text: &str) -> Result<Self> {
        let (toks, end) = lex(text)?;
        Ok(Self { toks, i: 0, end })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map_or(self.end, |(_, p)| *p)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(t, _)| t.clone());
        self.i += 1;
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(ParseError::new(self.pos(), msg))
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T> {
        match self.peek() {
            Some(t) => self.error(format!("expected {expected}, found {t}")),
            None => self.error(format!("expected {expected}, found end of input")),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.unexpected(&tok.to_string())
        }
    }

    fn var(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Var(x)) => {
                let x = x.clone();
                self.i += 1;
                Ok(x)
            }
            _ => self.unexpected("variable"),
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(x)) => {
                let x = x.clone();
                self.i += 1;
                Ok(x)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn finish(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => self.error(format!("unexpected {t}")),
        }
    }

    /// Precedence climbing over the binary operators.
    fn expr(&mut self, min_prec: u8) -> Result<Filter> {
        let mut lhs = self.operand()?;
        let mut chained: Option<u8> = None;
        while let Some(op) = self.peek().and_then(BinOp::from_tok) {
            let (prec, assoc) = op.info();
            if prec < min_prec {
                break;
            }
            if assoc == Assoc::None && chained == Some(prec) {
                return self.error("comparison operators cannot be chained; add parentheses");
            }
            self.i += 1;
            let rhs = self.expr(if assoc == Assoc::Right { prec } else { prec + 1 })?;
            lhs = op.build(lhs, rhs);
            chained = (assoc == Assoc::None).then_some(prec);
        }
        Ok(lhs)
    }

    fn operand(&mut self) -> Result<Filter> {
        let f = self.unary()?;
        if self.eat(&Tok::Keyword("as")) {
            let x = self.var()?;
            self.expect(Tok::Sym("|"))?;
            let body = self.expr(0)?;
            return Ok(Filter::bind(f, x, body));
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Filter> {
        if !self.eat(&Tok::Sym("-")) {
            return self.postfix();
        }
        if let Some(Tok::Num(n)) = self.peek() {
            // negative literals stay literals, so that they render back as themselves
            let n = 0i64.wrapping_sub_unsigned(*n);
            self.i += 1;
            return self.suffixes(Filter::Int(n), false);
        }
        let f = self.unary()?;
        Ok(Filter::cartesian(CartesianOp::Sub, Filter::Int(0), f))
    }

    fn postfix(&mut self) -> Result<Filter> {
        let dotted = self.peek() == Some(&Tok::Sym("."));
        let atom = self.atom()?;
        self.suffixes(atom, dotted)
    }

    /// `[f]` / `[]` suffixes (only after a path starting with `.`), then `?`.
    fn suffixes(&mut self, mut f: Filter, dotted: bool) -> Result<Filter> {
        while dotted && self.eat(&Tok::Sym("[")) {
            f = Filter::pipe(f, self.index_rest()?);
        }
        while self.eat(&Tok::Sym("?")) {
            f = Filter::Try(Box::new(f));
        }
        Ok(f)
    }

    /// The part of `.[]` or `.[f]` after the opening bracket.
    fn index_rest(&mut self) -> Result<Filter> {
        if self.eat(&Tok::Sym("]")) {
            return Ok(Filter::IterAll);
        }
        let i = self.expr(0)?;
        self.expect(Tok::Sym("]"))?;
        Ok(Filter::Index(Box::new(i)))
    }

    fn atom(&mut self) -> Result<Filter> {
        let pos = self.pos();
        let Some(tok) = self.next() else {
            self.i -= 1;
            return self.unexpected("filter");
        };
        match tok {
            Tok::Num(n) => match i64::try_from(n) {
                Ok(n) => Ok(Filter::Int(n)),
                Err(_) => Err(ParseError::new(pos, "integer literal out of range")),
            },
            Tok::Var(x) => Ok(Filter::Var(x)),
            Tok::Sym(".") => {
                if self.eat(&Tok::Sym("[")) {
                    self.index_rest()
                } else {
                    Ok(Filter::Identity)
                }
            }
            Tok::Sym("[") => {
                if self.eat(&Tok::Sym("]")) {
                    return Ok(Filter::Collect(Box::new(Filter::call("empty", vec![]))));
                }
                let f = self.expr(0)?;
                self.expect(Tok::Sym("]"))?;
                Ok(Filter::Collect(Box::new(f)))
            }
            Tok::Sym("(") => {
                let f = self.expr(0)?;
                self.expect(Tok::Sym(")"))?;
                Ok(f)
            }
            Tok::Keyword("if") => self.if_rest(),
            Tok::Keyword(kw @ ("reduce" | "foreach")) => {
                let kind = if kw == "reduce" {
                    FoldKind::Reduce
                } else {
                    FoldKind::Foreach
                };
                let xs = self.postfix()?;
                self.expect(Tok::Keyword("as"))?;
                let x = self.var()?;
                self.expect(Tok::Sym("("))?;
                let init = self.expr(0)?;
                self.expect(Tok::Sym(";"))?;
                let step = self.expr(0)?;
                self.expect(Tok::Sym(")"))?;
                Ok(Filter::fold(kind, xs, x, init, step))
            }
            Tok::Ident(name) => {
                let mut args = Vec::new();
                if self.eat(&Tok::Sym("(")) {
                    loop {
                        args.push(self.expr(0)?);
                        if self.eat(&Tok::Sym(")")) {
                            break;
                        }
                        self.expect(Tok::Sym(";"))?;
                    }
                }
                Ok(Filter::Call(name, args))
            }
            Tok::Keyword("def") => Err(ParseError::new(
                pos,
                "definitions are only allowed at the start of a program",
            )),
            t => Err(ParseError::new(pos, format!("expected filter, found {t}"))),
        }
    }

    /// After `if`: `c then t (elif c then t)* (else e)? end`.
    fn if_rest(&mut self) -> Result<Filter> {
        let cond = self.expr(0)?;
        self.expect(Tok::Keyword("then"))?;
        let then = self.expr(0)?;
        let otherwise = if self.eat(&Tok::Keyword("elif")) {
            return Ok(Filter::if_then_else(cond, then, self.if_rest()?));
        } else if self.eat(&Tok::Keyword("else")) {
            self.expr(0)?
        } else {
            Filter::Identity
        };
        self.expect(Tok::Keyword("end"))?;
        Ok(Filter::if_then_else(cond, then, otherwise))
    }

    fn definition(&mut self) -> Result<Definition> {
        let pos = self.pos();
        let name = self.ident()?;
        if RESERVED.contains(&name.as_str()) {
            return Err(ParseError::new(pos, format!("`{name}` is reserved")));
        }
        let mut params = Vec::new();
        if self.eat(&Tok::Sym("(")) {
            loop {
                let pos = self.pos();
                let p = self.ident()?;
                if RESERVED.contains(&p.as_str()) {
                    return Err(ParseError::new(pos, format!("`{p}` is reserved")));
                }
                if params.contains(&p) {
                    return Err(ParseError::new(pos, format!("duplicate parameter `{p}`")));
                }
                params.push(p);
                if self.eat(&Tok::Sym(")")) {
                    break;
                }
                self.expect(Tok::Sym(";"))?;
            }
        }
        self.expect(Tok::Sym(":"))?;
        let body = self.expr(0)?;
        self.expect(Tok::Sym(";"))?;
        Ok(Definition { name, params, body })
    }

    fn definitions(&mut self) -> Result<Vec<Definition>> {
        let mut defs = Vec::new();
        let mut seen = HashSet::new();
        while self.peek() == Some(&Tok::Keyword("def")) {
            self.i += 1;
            let pos = self.pos();
            let def = self.definition()?;
            if !seen.insert((def.name.clone(), def.params.len())) {
                return Err(ParseError::new(
                    pos,
                    format!("duplicate definition of {}/{}", def.name, def.params.len()),
                ));
            }
            defs.push(def);
        }
        Ok(defs)
    }
}

/// Parse a single filter.
pub fn parse_filter(text: &str) -> Result<Filter> {
    let mut p = Parser::new(text)?;
    let f = p.expr(0)?;
    p.finish()?;
    Ok(f)
}

/// Parse a sequence of `def ...;` definitions.
pub fn parse_defs(text: &str) -> Result<Vec<Definition>> {
    let mut p = Parser::new(text)?;
    let defs = p.definitions()?;
    p.finish()?;
    Ok(defs)
}

/// Parse a program: leading definitions followed by the main filter.
pub fn parse_program(text: &str) -> Result<(Vec<Definition>, Filter)> {
    let mut p = Parser::new(text)?;
    let defs = p.definitions()?;
    let f = p.expr(0)?;
    p.finish()?;
    Ok((defs, f))
}
