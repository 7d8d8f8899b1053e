//! Filter syntax: abstract syntax tree, parser, and renderer.

mod lex;
mod parse;

use crate::value::CartesianOp;
use std::fmt;

pub use parse::{parse_defs, parse_filter, parse_program, ParseError};

/// Operators of the lowest precedence group, combining whole filters.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum ComplexOp {
    /// `f | g`
    Pipe,
    /// `f, g`
    Comma,
    /// `f |= g`
    Update,
    /// `f or g`
    Or,
    /// `f and g`
    And,
}

impl ComplexOp {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::Pipe => "|",
            Self::Comma => ",",
            Self::Update => "|=",
            Self::Or => "or",
            Self::And => "and",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum FoldKind {
    Reduce,
    Foreach,
}

impl FoldKind {
    pub fn keyword(self) -> &'static str {
        match self {
            Self::Reduce => "reduce",
            Self::Foreach => "foreach",
        }
    }
}

/// A filter in named-variable form, as produced by the parser.
///
/// Variable names are stored without the leading `$`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Filter {
    Int(i64),
    Var(String),
    Identity,
    /// `.[]`
    IterAll,
    /// `.[f]`
    Index(Box<Filter>),
    /// `[f]`
    Collect(Box<Filter>),
    /// `f?`
    Try(Box<Filter>),
    Complex(ComplexOp, Box<Filter>, Box<Filter>),
    Cartesian(CartesianOp, Box<Filter>, Box<Filter>),
    IfThenElse(Box<Filter>, Box<Filter>, Box<Filter>),
    /// `f as $x | g`
    Bind(Box<Filter>, String, Box<Filter>),
    /// `reduce xs as $x (init; step)` and `foreach ...`
    Fold(FoldKind, Box<Filter>, String, Box<Filter>, Box<Filter>),
    Call(String, Vec<Filter>),
}

/// `def name(p1; ...; pn): body;`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub params: Vec<String>,
    pub body: Filter,
}

impl Filter {
    pub fn complex(op: ComplexOp, l: Filter, r: Filter) -> Self {
        Self::Complex(op, Box::new(l), Box::new(r))
    }

    pub fn cartesian(op: CartesianOp, l: Filter, r: Filter) -> Self {
        Self::Cartesian(op, Box::new(l), Box::new(r))
    }

    pub fn pipe(l: Filter, r: Filter) -> Self {
        Self::complex(ComplexOp::Pipe, l, r)
    }

    pub fn comma(l: Filter, r: Filter) -> Self {
        Self::complex(ComplexOp::Comma, l, r)
    }

    pub fn bind(f: Filter, x: impl Into<String>, body: Filter) -> Self {
        Self::Bind(Box::new(f), x.into(), Box::new(body))
    }

    pub fn if_then_else(c: Filter, t: Filter, e: Filter) -> Self {
        Self::IfThenElse(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn fold(kind: FoldKind, xs: Filter, x: impl Into<String>, init: Filter, step: Filter) -> Self {
        Self::Fold(kind, Box::new(xs), x.into(), Box::new(init), Box::new(step))
    }

    pub fn call(name: impl Into<String>, args: Vec<Filter>) -> Self {
        Self::Call(name.into(), args)
    }

    pub fn var(name: impl Into<String>) -> Self {
        Self::Var(name.into())
    }

    /// Render with every compound subterm parenthesized, such that parsing
    /// the result yields a structurally equal filter.
    pub fn render(&self) -> String {
        self.to_string()
    }

    fn is_atomic(&self) -> bool {
        match self {
            Self::Int(n) => *n >= 0,
            Self::Var(_) | Self::Identity | Self::IterAll | Self::Index(_) | Self::Collect(_) => true,
            Self::Try(_) | Self::IfThenElse(..) | Self::Fold(..) | Self::Call(..) => true,
            Self::Complex(..) | Self::Cartesian(..) | Self::Bind(..) => false,
        }
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.is_atomic() {
            write!(f, "{self}")
        } else {
            write!(f, "({self})")
        }
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Self::Int(n) if *n < 0 => write!(f, "({n})"),
            Self::Int(n) => write!(f, "{n}"),
            Self::Var(x) => write!(f, "${x}"),
            Self::Identity => f.write_str("."),
            Self::IterAll => f.write_str(".[]"),
            Self::Index(i) => write!(f, ".[{i}]"),
            Self::Collect(inner) => write!(f, "[{inner}]"),
            Self::Try(inner) => {
                inner.fmt_atom(f)?;
                f.write_str("?")
            }
            Self::Complex(ComplexOp::Comma, l, r) => write!(f, "({l}, {r})"),
            Self::Complex(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Self::Cartesian(op, l, r) => write!(f, "({l} {op} {r})"),
            Self::IfThenElse(c, t, e) => write!(f, "if {c} then {t} else {e} end"),
            Self::Bind(src, x, body) => {
                f.write_str("(")?;
                src.fmt_atom(f)?;
                write!(f, " as ${x} | {body})")
            }
            Self::Fold(kind, xs, x, init, step) => {
                write!(f, "{} ", kind.keyword())?;
                xs.fmt_atom(f)?;
                write!(f, " as ${x} ({init}; {step})")
            }
            Self::Call(name, args) if args.is_empty() => f.write_str(name),
            Self::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Definition {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "def {}", self.name)?;
        if !self.params.is_empty() {
            write!(f, "({})", self.params.join("; "))?;
        }
        write!(f, ": {};", self.body)
    }
}
