//! Native filters and the standard definitions built on top of them.

use crate::compile::Term;
use crate::eval::{run, type_error, Ctx};
use crate::value::{Stream, Value, ValueResult};
use std::iter;
use std::sync::Arc;

/// Filters implemented in Rust rather than in the language.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Native {
    Empty,
    Null,
    Range,
    Reverse,
    Sort,
    Recurse,
    Limit,
    IsArr,
}

pub struct NativeFilter {
    pub name: &'static str,
    pub arity: usize,
    pub native: Native,
    /// Whether the filter may appear on the left of `|=`.
    pub path: bool,
}

pub const NATIVES: &[NativeFilter] = &[
    NativeFilter { name: "empty", arity: 0, native: Native::Empty, path: true },
    NativeFilter { name: "null", arity: 0, native: Native::Null, path: false },
    NativeFilter { name: "range", arity: 1, native: Native::Range, path: false },
    NativeFilter { name: "reverse", arity: 0, native: Native::Reverse, path: false },
    NativeFilter { name: "sort", arity: 0, native: Native::Sort, path: false },
    NativeFilter { name: "recurse", arity: 1, native: Native::Recurse, path: true },
    NativeFilter { name: "limit", arity: 2, native: Native::Limit, path: false },
    NativeFilter { name: "isarr", arity: 0, native: Native::IsArr, path: false },
];

/// Look up a native filter by name and arity.
pub fn native(name: &str, arity: usize) -> Option<&'static NativeFilter> {
    NATIVES.iter().find(|n| n.name == name && n.arity == arity)
}

impl Native {
    fn entry(self) -> &'static NativeFilter {
        NATIVES.iter().find(|n| n.native == self).expect("every native is registered")
    }

    pub fn name(self) -> &'static str {
        self.entry().name
    }

    pub fn path_capable(self) -> bool {
        self.entry().path
    }
}

/// Standard definitions, loaded unless disabled.
pub const DEFINITIONS: &str = "\
def true: 0 == 0;
def false: 0 != 0;
def not: if . then false else true end;
def select(f): if f then . else empty end;
def add: reduce .[] as $x (null; . + $x);
def length: if . == null then 0 else reduce .[] as $x (0; . + 1) end;
def last(f): reduce f as $x (null; $x);
def nth(n; f): last(limit(n + 1; f));
def scalars: if isarr then empty else . end;
def flatten: [recurse(if isarr then .[] else empty end) | scalars];
def trees: recurse([., .]);
";

fn array_op(v: Value, name: &str, f: impl FnOnce(&mut Vec<Value>)) -> ValueResult {
    match v {
        Value::Arr(mut a) => {
            f(Arc::make_mut(&mut a));
            Ok(Value::Arr(a))
        }
        other => Err(type_error(&format!("{name} expects an array"), &other)),
    }
}

pub(crate) fn run_native<'a>(native: Native, args: &'a [Term], ctx: Ctx, v: Value) -> Stream<'a> {
    match native {
        Native::Empty => Stream::empty(),
        Native::Null => Stream::once(Ok(Value::Null)),
        Native::IsArr => Stream::once(Ok(Value::Bool(v.is_array()))),
        Native::Reverse => Stream::new(iter::once_with(move || array_op(v, "reverse", |a| a.reverse()))),
        Native::Sort => Stream::new(iter::once_with(move || array_op(v, "sort", |a| a.sort()))),
        Native::Range => Stream::new(run(&args[0], ctx, v).flat_map(|n| match n {
            Ok(Value::Int(n)) => Stream::new((0..n).map(|i| Ok(Value::Int(i)))),
            Ok(other) => Stream::once(Err(type_error("range expects an integer", &other))),
            Err(e) => Stream::once(Err(e)),
        })),
        Native::Limit => {
            let f = &args[1];
            Stream::new(run(&args[0], ctx.clone(), v.clone()).flat_map(move |n| match n {
                Ok(Value::Int(n)) if n <= 0 => Stream::empty(),
                Ok(Value::Int(n)) => {
                    let n = usize::try_from(n).unwrap_or(usize::MAX);
                    Stream::new(run(f, ctx.clone(), v.clone()).take(n))
                }
                Ok(other) => Stream::once(Err(type_error("limit expects an integer", &other))),
                Err(e) => Stream::once(Err(e)),
            }))
        }
        Native::Recurse => Stream::new(Recurse { f: &args[0], ctx, stack: vec![Stream::once(Ok(v))] }),
    }
}

/// Depth-first, pre-order traversal of `f`'s repeated outputs.
struct Recurse<'a> {
    f: &'a Term,
    ctx: Ctx,
    stack: Vec<Stream<'a>>,
}

impl Iterator for Recurse<'_> {
    type Item = ValueResult;

    fn next(&mut self) -> Option<ValueResult> {
        loop {
            let x = match self.stack.last_mut()?.next() {
                None => {
                    self.stack.pop();
                    continue;
                }
                Some(x) => x,
            };
            if let Ok(x) = &x {
                let (f, ctx, x) = (self.f, self.ctx.clone(), x.clone());
                self.stack.push(Stream::lazy(move || run(f, ctx, x)));
            }
            return Some(x);
        }
    }
}
