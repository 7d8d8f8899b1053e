//! Values, value results, and the primitive operations on them.

use std::fmt;
use std::sync::Arc;

/// A value of the language: null, a boolean, a 64-bit integer, or an array.
///
/// Arrays are reference-counted, so cloning a value never copies elements.
/// Operations that modify arrays take `self` by value and only copy the
/// element buffer when it is shared.
///
/// The derived ordering is the total order used for comparisons and `sort`:
/// `null < false < true < integers < arrays`, integers numerically and
/// arrays lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Arr(Arc<Vec<Value>>),
}

/// The error value. Its message is diagnostic only: all errors compare equal.
#[derive(Clone, Debug)]
pub struct Error(String);

impl Error {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }

    pub fn message(&self) -> &str {
        &self.0
    }
}

impl PartialEq for Error {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Error {}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Error {}

/// Either a value or an error.
pub type ValueResult = Result<Value, Error>;

/// Binary operators that act on every pair drawn from their operand streams.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum CartesianOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl CartesianOp {
    pub const ALL: [CartesianOp; 11] = [
        Self::Eq,
        Self::Ne,
        Self::Lt,
        Self::Le,
        Self::Gt,
        Self::Ge,
        Self::Add,
        Self::Sub,
        Self::Mul,
        Self::Div,
        Self::Rem,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Eq => "==",
            Self::Ne => "!=",
            Self::Lt => "<",
            Self::Le => "<=",
            Self::Gt => ">",
            Self::Ge => ">=",
            Self::Add => "+",
            Self::Sub => "-",
            Self::Mul => "*",
            Self::Div => "/",
            Self::Rem => "%",
        }
    }
}

impl fmt::Display for CartesianOp {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Value {
    pub fn from_vec(elems: Vec<Value>) -> Self {
        Self::Arr(Arc::new(elems))
    }

    pub fn is_array(&self) -> bool {
        matches!(self, Self::Arr(_))
    }

    pub fn as_array(&self) -> Option<&[Value]> {
        match self {
            Self::Arr(a) => Some(a),
            _ => None,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::Null => "null",
            Self::Bool(_) => "boolean",
            Self::Int(_) => "integer",
            Self::Arr(_) => "array",
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Self::Bool(b)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Self::Int(n)
    }
}

impl FromIterator<Value> for Value {
    fn from_iter<I: IntoIterator<Item = Value>>(iter: I) -> Self {
        Self::from_vec(iter.into_iter().collect())
    }
}

/// Canonical compact rendering: `null`, `true`, `1`, `[1,[2],false]`.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Self::Null => f.write_str("null"),
            Self::Bool(b) => write!(f, "{b}"),
            Self::Int(n) => write!(f, "{n}"),
            Self::Arr(a) => {
                f.write_str("[")?;
                for (i, x) in a.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    x.fmt(f)?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Rendering of `v` for diagnostics, cut short after a few dozen characters.
pub(crate) fn brief(v: &Value) -> String {
    struct Bounded(String);
    impl fmt::Write for Bounded {
        fn write_str(&mut self, s: &str) -> fmt::Result {
            self.0.push_str(s);
            if self.0.len() > 40 {
                Err(fmt::Error)
            } else {
                Ok(())
            }
        }
    }
    let mut out = Bounded(String::new());
    if fmt::write(&mut out, format_args!("{v}")).is_err() {
        out.0.truncate(40);
        out.0.push_str("...");
    }
    out.0
}

fn checked(op: CartesianOp, r: Option<i64>, l: i64, rhs: i64) -> ValueResult {
    r.map(Value::Int).ok_or_else(|| match op {
        CartesianOp::Div | CartesianOp::Rem if rhs == 0 => {
            Error::new(format!("cannot compute {l} {op} 0: division by zero"))
        }
        _ => Error::new(format!("integer overflow in {l} {op} {rhs}")),
    })
}

/// Apply a Cartesian operator to a pair of values.
///
/// `l` is taken by value so that `array + array` can extend `l` in place
/// when nobody else holds it.
pub fn cartesian(op: CartesianOp, l: Value, r: Value) -> ValueResult {
    use CartesianOp::*;
    use Value::*;
    match op {
        Eq => Ok(Bool(l == r)),
        Ne => Ok(Bool(l != r)),
        Lt => Ok(Bool(l < r)),
        Le => Ok(Bool(l <= r)),
        Gt => Ok(Bool(l > r)),
        Ge => Ok(Bool(l >= r)),
        Add => match (l, r) {
            (Null, r) => Ok(r),
            (l, Null) => Ok(l),
            (Int(x), Int(y)) => checked(op, x.checked_add(y), x, y),
            (Arr(mut x), Arr(y)) => {
                if x.is_empty() {
                    return Ok(Arr(y));
                }
                let xs = Arc::make_mut(&mut x);
                match Arc::try_unwrap(y) {
                    Ok(ys) => xs.extend(ys),
                    Err(ys) => xs.extend(ys.iter().cloned()),
                }
                Ok(Arr(x))
            }
            (l, r) => Err(type_error(op, &l, &r)),
        },
        Sub | Mul | Div | Rem => match (l, r) {
            (Int(x), Int(y)) => {
                let res = match op {
                    Sub => x.checked_sub(y),
                    Mul => x.checked_mul(y),
                    Div => x.checked_div(y),
                    _ => x.checked_rem(y),
                };
                checked(op, res, x, y)
            }
            (l, r) => Err(type_error(op, &l, &r)),
        },
    }
}

fn type_error(op: CartesianOp, l: &Value, r: &Value) -> Error {
    Error::new(format!(
        "{} ({}) and {} ({}) cannot be combined with {op}",
        l.kind(),
        brief(l),
        r.kind(),
        brief(r)
    ))
}

pub(crate) fn normalize(len: usize, i: &Value) -> Result<usize, Error> {
    let i = match i {
        Value::Int(i) => *i,
        other => return Err(Error::new(format!("cannot index array with {}", brief(other)))),
    };
    let len_i = i64::try_from(len).unwrap_or(i64::MAX);
    let norm = if i < 0 { len_i + i } else { i };
    if (0..len_i).contains(&norm) {
        Ok(norm as usize)
    } else {
        Err(Error::new(format!(
            "index {i} out of range for array of length {len}"
        )))
    }
}

/// Element `i` of the array `v`. Negative indices count from the end.
pub fn index(v: &Value, i: &Value) -> ValueResult {
    match v {
        Value::Arr(a) => normalize(a.len(), i).map(|i| a[i].clone()),
        other => Err(Error::new(format!("cannot index {}", brief(other)))),
    }
}

/// Iterator over the elements of an array, moving them out when unshared.
pub enum Elems {
    Owned(std::vec::IntoIter<Value>),
    Shared(Arc<Vec<Value>>, std::ops::Range<usize>),
    Fail(Option<Error>),
}

impl Iterator for Elems {
    type Item = ValueResult;

    fn next(&mut self) -> Option<ValueResult> {
        match self {
            Self::Owned(it) => it.next().map(Ok),
            Self::Shared(a, range) => range.next().map(|i| Ok(a[i].clone())),
            Self::Fail(e) => e.take().map(Err),
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match self {
            Self::Owned(it) => it.size_hint(),
            Self::Shared(_, range) => range.size_hint(),
            Self::Fail(e) => {
                let n = usize::from(e.is_some());
                (n, Some(n))
            }
        }
    }
}

/// The elements of an array, or a single error for any other value.
pub fn elems(v: Value) -> Elems {
    match v {
        Value::Arr(a) => match Arc::try_unwrap(a) {
            Ok(vec) => Elems::Owned(vec.into_iter()),
            Err(a) => {
                let len = a.len();
                Elems::Shared(a, 0..len)
            }
        },
        other => Elems::Fail(Some(Error::new(format!("cannot iterate over {}", brief(&other))))),
    }
}

/// Collect a stream into an array, or return its leftmost error.
pub fn stream_to_array(s: impl Iterator<Item = ValueResult>) -> ValueResult {
    let mut out = Vec::with_capacity(s.size_hint().0);
    for x in s {
        out.push(x?);
    }
    Ok(Value::from_vec(out))
}

/// Replace element `i` of `v` by the outputs of `replacement`.
pub fn splice_at(
    v: Value,
    i: &Value,
    replacement: impl Iterator<Item = ValueResult>,
) -> ValueResult {
    splice_with(v, i, |_| replacement)
}

/// Like [`splice_at`], but the replacement is computed from the element.
///
/// When `v` is unshared, the element is moved (not cloned) into `f`, and a
/// single replacement value is written back in place.
pub fn splice_with<I>(v: Value, i: &Value, f: impl FnOnce(Value) -> I) -> ValueResult
where
    I: Iterator<Item = ValueResult>,
{
    let mut arr = match v {
        Value::Arr(a) => a,
        other => return Err(Error::new(format!("cannot update element of {}", brief(&other)))),
    };
    let i = normalize(arr.len(), i)?;
    let elems = Arc::make_mut(&mut arr);
    let old = std::mem::replace(&mut elems[i], Value::Null);
    let mut replacement = f(old);
    let first = match replacement.next() {
        None => {
            elems.remove(i);
            return Ok(Value::Arr(arr));
        }
        Some(x) => x?,
    };
    match replacement.next() {
        None => elems[i] = first,
        Some(second) => {
            let mut rest = vec![first, second?];
            for x in replacement {
                rest.push(x?);
            }
            elems.splice(i..=i, rest);
        }
    }
    Ok(Value::Arr(arr))
}

/// Three-way branch on a value result: an error yields the error,
/// a value equal to `pivot` yields `then_s`, anything else yields `else_s`.
///
/// The branches are thunks so that the untaken branch is never evaluated.
pub fn ite<'a>(
    v: ValueResult,
    pivot: &Value,
    then_s: impl FnOnce() -> Stream<'a>,
    else_s: impl FnOnce() -> Stream<'a>,
) -> Stream<'a> {
    match v {
        Err(e) => Stream::once(Err(e)),
        Ok(v) if v == *pivot => then_s(),
        Ok(_) => else_s(),
    }
}

/// A lazy, possibly infinite sequence of value results.
///
/// [`Stream::bounds`] gives a lower and an optional upper bound on the
/// number of remaining elements; both are always sound.
pub struct Stream<'a>(Box<dyn Iterator<Item = ValueResult> + 'a>);

impl<'a> Stream<'a> {
    pub fn new(iter: impl Iterator<Item = ValueResult> + 'a) -> Self {
        Self(Box::new(iter))
    }

    pub fn once(x: ValueResult) -> Self {
        Self::new(std::iter::once(x))
    }

    pub fn empty() -> Self {
        Self::new(std::iter::empty())
    }

    /// A stream that is only constructed when its first element is requested.
    pub fn lazy(f: impl FnOnce() -> Stream<'a> + 'a) -> Self {
        Self::new(Lazy::Pending(Some(Box::new(f))))
    }

    pub fn bounds(&self) -> (usize, Option<usize>) {
        self.0.size_hint()
    }
}

impl Iterator for Stream<'_> {
    type Item = ValueResult;

    fn next(&mut self) -> Option<ValueResult> {
        self.0.next()
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.0.size_hint()
    }
}

enum Lazy<'a> {
    Pending(Option<Box<dyn FnOnce() -> Stream<'a> + 'a>>),
    Forced(Stream<'a>),
}

impl Iterator for Lazy<'_> {
    type Item = ValueResult;

    fn next(&mut self) -> Option<ValueResult> {
        if let Self::Pending(f) = self {
            let f = f.take().expect("lazy stream forced twice");
            *self = Self::Forced(f());
        }
        match self {
            Self::Forced(s) => s.next(),
            Self::Pending(_) => unreachable!(),
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match self {
            Self::Forced(s) => s.size_hint(),
            Self::Pending(_) => (0, None),
        }
    }
}
