//! The update operator `|=`, with two interchangeable engines.
//!
//! The default engine interleaves the evaluation of the path and the update
//! filter and never materializes paths. The legacy engine reproduces the
//! traditional strategy: collect all paths against the original input first,
//! then update them one after the other.

use crate::compile::Term;
use crate::eval::{collect_until_error, fold, run, Ctx, Step, TRUE};
use crate::prelude::Native;
use crate::syntax::FoldKind;
use crate::value::{brief, elems, normalize, splice_with, stream_to_array, Error, Stream, Value, ValueResult};
use std::rc::Rc;
use std::str::FromStr;
use std::sync::Arc;

/// Strategy used to evaluate `|=`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub enum Engine {
    /// Interleaved path and update evaluation.
    #[default]
    New,
    /// Collect paths first, then update at each path.
    Legacy,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Self::New => "new",
            Self::Legacy => "legacy",
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "new" => Ok(Self::New),
            "legacy" => Ok(Self::Legacy),
            _ => Err(format!("unknown engine `{s}` (expected `new` or `legacy`)")),
        }
    }
}

/// What to do with each value reached by a path.
///
/// The update filter is paired with the context of the `|=` node, so it
/// cannot see variables bound inside the path.
pub enum UpdateClosure<'a> {
    /// Run the update filter.
    Sigma(&'a Term, Ctx),
    /// Update the value at the given path (in its own context) with the inner closure.
    Then(&'a Term, Ctx, Rc<UpdateClosure<'a>>),
}

impl<'a> UpdateClosure<'a> {
    fn apply(self: &Rc<Self>, v: Value) -> Stream<'a> {
        match &**self {
            Self::Sigma(sigma, ctx) => run(sigma, ctx.clone(), v),
            Self::Then(path, ctx, inner) => eval_update(path, inner.clone(), ctx.clone(), v),
        }
    }
}

pub(crate) fn update<'a>(engine: Engine, path: &'a Term, sigma: &'a Term, ctx: Ctx, v: Value) -> Stream<'a> {
    match engine {
        Engine::New => {
            let u = Rc::new(UpdateClosure::Sigma(sigma, ctx.clone()));
            eval_update(path, u, ctx, v)
        }
        Engine::Legacy => Stream::lazy(move || eval_update_legacy(path, sigma, ctx, v)),
    }
}

fn not_a_path(what: &str) -> Error {
    Error::new(format!("{what} is not a path expression and cannot be updated"))
}

fn describe(t: &Term) -> &'static str {
    match t {
        Term::Int(_) => "integer literal",
        Term::Var(_) => "variable",
        Term::Collect(_) => "array construction",
        Term::Try(_) => "`?`",
        Term::Or(..) | Term::And(..) => "boolean operator",
        Term::Cartesian(..) => "binary operator",
        Term::Fold(FoldKind::Reduce, ..) => "`reduce`",
        Term::Fold(FoldKind::Foreach, ..) => "`foreach`",
        Term::Update(..) => "`|=`",
        Term::Native(n, _) => n.name(),
        _ => "filter",
    }
}

/// `mu |= u` on `v` with interleaved semantics.
pub fn eval_update<'a>(mu: &'a Term, u: Rc<UpdateClosure<'a>>, ctx: Ctx, v: Value) -> Stream<'a> {
    match mu {
        Term::Identity => u.apply(v),
        Term::Native(Native::Empty, _) => Stream::once(Ok(v)),
        Term::Pipe(f, g) => {
            let then = Rc::new(UpdateClosure::Then(g, ctx.clone(), u));
            eval_update(f, then, ctx, v)
        }
        Term::Comma(f, g) => {
            let first = eval_update(f, u.clone(), ctx.clone(), v);
            Stream::new(first.flat_map(move |x| match x {
                Ok(x) => eval_update(g, u.clone(), ctx.clone(), x),
                Err(e) => Stream::once(Err(e)),
            }))
        }
        Term::Bind(f, body) => Stream::lazy(move || {
            let xs = Rc::new(collect_until_error(run(f, ctx.clone(), v.clone())));
            let step: Step = Rc::new(move |state, x| eval_update(body, u.clone(), ctx.cons(Ok(x.clone())), state));
            Stream::new(fold(FoldKind::Reduce, Ok(v), xs, step))
        }),
        Term::IfThenElse(c, then_, else_) => Stream::lazy(move || {
            let xs = Rc::new(collect_until_error(run(c, ctx.clone(), v.clone())));
            let step: Step = Rc::new(move |state, x| {
                let branch = if *x == TRUE { then_ } else { else_ };
                eval_update(branch, u.clone(), ctx.clone(), state)
            });
            Stream::new(fold(FoldKind::Reduce, Ok(v), xs, step))
        }),
        Term::Index(f) => Stream::new(std::iter::once_with(move || {
            let indices = collect_until_error(run(f, ctx, v.clone()));
            indices.into_iter().try_fold(v, |v, i| splice_with(v, &i?, |x| u.apply(x)))
        })),
        Term::IterAll => Stream::new(std::iter::once_with(move || {
            stream_to_array(elems(v).flat_map(|x| match x {
                Ok(x) => u.apply(x),
                Err(e) => Stream::once(Err(e)),
            }))
        })),
        Term::Native(Native::Recurse, args) => {
            // recurse(f) = ., (f | recurse(f))
            let f = &args[0];
            let rest = Rc::new(UpdateClosure::Then(mu, ctx.clone(), u.clone()));
            Stream::new(u.apply(v).flat_map(move |x| match x {
                Ok(x) => eval_update(f, rest.clone(), ctx.clone(), x),
                Err(e) => Stream::once(Err(e)),
            }))
        }
        other => Stream::once(Err(not_a_path(describe(other)))),
    }
}

/// A position inside a value: a sequence of non-negative array indices.
pub type Path = Vec<usize>;

/// The paths of the values that `mu` returns on `v`, in output order,
/// paired with those values.
pub fn collect_paths(mu: &Term, ctx: &Ctx, v: &Value) -> Vec<Result<(Path, Value), Error>> {
    let mut out = Vec::new();
    paths(mu, ctx, Vec::new(), v, &mut out);
    out
}

fn paths(mu: &Term, ctx: &Ctx, at: Path, v: &Value, out: &mut Vec<Result<(Path, Value), Error>>) {
    let child = |at: &Path, i| {
        let mut p = at.clone();
        p.push(i);
        p
    };
    match mu {
        Term::Identity => out.push(Ok((at, v.clone()))),
        Term::Native(Native::Empty, _) => {}
        Term::IterAll => match v {
            Value::Arr(a) => out.extend(a.iter().enumerate().map(|(i, x)| Ok((child(&at, i), x.clone())))),
            _ => out.push(Err(Error::new(format!("cannot iterate over {}", brief(v))))),
        },
        Term::Index(f) => {
            for i in run(f, ctx.clone(), v.clone()) {
                let r = i.and_then(|i| match v {
                    Value::Arr(a) => normalize(a.len(), &i).map(|i| (child(&at, i), a[i].clone())),
                    _ => Err(Error::new(format!("cannot index {}", brief(v)))),
                });
                out.push(r);
            }
        }
        Term::Pipe(f, g) => {
            for r in collect_paths_at(f, ctx, at, v) {
                match r {
                    Ok((p, x)) => paths(g, ctx, p, &x, out),
                    Err(e) => out.push(Err(e)),
                }
            }
        }
        Term::Comma(f, g) => {
            paths(f, ctx, at.clone(), v, out);
            paths(g, ctx, at, v, out);
        }
        Term::Bind(f, body) => {
            for x in run(f, ctx.clone(), v.clone()) {
                paths(body, &ctx.cons(x), at.clone(), v, out);
            }
        }
        Term::IfThenElse(c, then_, else_) => {
            for x in run(c, ctx.clone(), v.clone()) {
                match x {
                    Ok(x) if x == TRUE => paths(then_, ctx, at.clone(), v, out),
                    Ok(_) => paths(else_, ctx, at.clone(), v, out),
                    Err(e) => out.push(Err(e)),
                }
            }
        }
        Term::Native(Native::Recurse, args) => {
            out.push(Ok((at.clone(), v.clone())));
            for r in collect_paths_at(&args[0], ctx, at, v) {
                match r {
                    Ok((p, x)) => paths(mu, ctx, p, &x, out),
                    Err(e) => out.push(Err(e)),
                }
            }
        }
        other => out.push(Err(not_a_path(describe(other)))),
    }
}

fn collect_paths_at(mu: &Term, ctx: &Ctx, at: Path, v: &Value) -> Vec<Result<(Path, Value), Error>> {
    let mut out = Vec::new();
    paths(mu, ctx, at, v, &mut out);
    out
}

/// `mu |= sigma` on `v` by collecting all paths first.
///
/// At each path, the first output of `sigma` replaces the value there and
/// no output deletes it. Paths that no longer exist are skipped.
pub fn eval_update_legacy<'a>(mu: &'a Term, sigma: &'a Term, ctx: Ctx, v: Value) -> Stream<'a> {
    let mut ps = Vec::new();
    for r in collect_paths(mu, &ctx, &v) {
        match r {
            Ok((p, _)) => ps.push(p),
            Err(e) => return Stream::once(Err(e)),
        }
    }
    let mut state = v;
    for p in ps {
        match update_at(state, &p, &|x| run(sigma, ctx.clone(), x).next()) {
            Ok(Some(x)) => state = x,
            Ok(None) => return Stream::empty(),
            Err(e) => return Stream::once(Err(e)),
        }
    }
    Stream::once(Ok(state))
}

/// Replace the value at `path` by `f` of it, or delete it if `f` yields nothing.
fn update_at(v: Value, path: &[usize], f: &dyn Fn(Value) -> Option<ValueResult>) -> Result<Option<Value>, Error> {
    let Some((&i, rest)) = path.split_first() else {
        return f(v).transpose();
    };
    let mut arr = match v {
        Value::Arr(a) => a,
        other => return Err(Error::new(format!("cannot update element of {}", brief(&other)))),
    };
    if i >= arr.len() {
        return Ok(Some(Value::Arr(arr)));
    }
    let elems = Arc::make_mut(&mut arr);
    let x = std::mem::replace(&mut elems[i], Value::Null);
    match update_at(x, rest, f)? {
        Some(x) => elems[i] = x,
        None => {
            elems.remove(i);
        }
    }
    Ok(Some(Value::Arr(arr)))
}
