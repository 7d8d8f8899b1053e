//! Evaluation of resolved filters to lazy streams.

use crate::compile::Term;
use crate::syntax::FoldKind;
use crate::value::{cartesian, elems, index, ite, stream_to_array, CartesianOp, Error, Stream, Value, ValueResult};
use std::iter;
use std::rc::Rc;

pub(crate) const TRUE: Value = Value::Bool(true);
const FALSE: Value = Value::Bool(false);

/// Values bound by enclosing binders, innermost first.
///
/// Bound entries are value results: a binder whose source yields `⊥` binds
/// the error, which only surfaces where the variable is used.
#[derive(Clone, Default)]
pub struct Ctx(Option<Rc<(ValueResult, Ctx)>>);

impl Ctx {
    pub fn new() -> Self {
        Self(None)
    }

    pub fn cons(&self, x: ValueResult) -> Self {
        Self(Some(Rc::new((x, self.clone()))))
    }

    /// The value bound `d` binders up.
    pub fn get(&self, mut d: usize) -> &ValueResult {
        let mut cur = self;
        loop {
            let node = cur.0.as_ref().expect("variable distance exceeds context");
            if d == 0 {
                return &node.0;
            }
            d -= 1;
            cur = &node.1;
        }
    }
}

/// Outputs of `t` on the value result `v`. An error input yields just that error.
pub fn eval<'a>(t: &'a Term, ctx: Ctx, v: ValueResult) -> Stream<'a> {
    match v {
        Ok(v) => run(t, ctx, v),
        Err(e) => Stream::once(Err(e)),
    }
}

/// Outputs of `t` on the value `v`.
pub fn run<'a>(t: &'a Term, ctx: Ctx, v: Value) -> Stream<'a> {
    match t {
        Term::Int(n) => Stream::once(Ok(Value::Int(*n))),
        Term::Var(d) => Stream::once(ctx.get(*d).clone()),
        Term::Identity => Stream::once(Ok(v)),
        Term::IterAll => Stream::new(elems(v)),
        Term::Index(i) => {
            let idx = run(i, ctx, v.clone());
            Stream::new(idx.map(move |i| index(&v, &i?)))
        }
        Term::Collect(f) => Stream::new(iter::once_with(move || stream_to_array(run(f, ctx, v)))),
        Term::Try(f) => Stream::new(run(f, ctx, v).filter(Result::is_ok)),
        Term::Pipe(l, r) => {
            let ls = run(l, ctx.clone(), v);
            Stream::new(ls.flat_map(move |x| eval(r, ctx.clone(), x)))
        }
        Term::Comma(l, r) => Stream::new(run(l, ctx.clone(), v.clone()).chain(run(r, ctx, v))),
        Term::Bind(f, body) => for_each_output(run(f, ctx.clone(), v.clone()), v, move |x, v| {
            run(body, ctx.cons(x), v)
        }),
        Term::IfThenElse(c, then_, else_) => {
            for_each_output(run(c, ctx.clone(), v.clone()), v, move |x, v| {
                let branch = match x {
                    Ok(x) if x == TRUE => then_,
                    Ok(_) => else_,
                    Err(e) => return Stream::once(Err(e)),
                };
                run(branch, ctx.clone(), v)
            })
        }
        Term::And(l, r) => for_each_output(run(l, ctx.clone(), v.clone()), v, move |x, v| {
            ite(x, &FALSE, || Stream::once(Ok(FALSE)), || run(r, ctx.clone(), v))
        }),
        Term::Or(l, r) => for_each_output(run(l, ctx.clone(), v.clone()), v, move |x, v| {
            ite(x, &TRUE, || Stream::once(Ok(TRUE)), || run(r, ctx.clone(), v))
        }),
        Term::Cartesian(op, l, r) => Stream::lazy(move || run_cartesian(*op, l, r, ctx, v)),
        Term::Fold(kind, xs, init, step) => Stream::lazy(move || {
            let xs = Rc::new(collect_until_error(run(xs, ctx.clone(), v.clone())));
            let inits = run(init, ctx.clone(), v);
            let step: Step = Rc::new(move |state, x| run(step, ctx.cons(Ok(x.clone())), state));
            let kind = *kind;
            Stream::new(inits.flat_map(move |i| fold(kind, i, xs.clone(), step.clone())))
        }),
        Term::Update(engine, path, sigma) => crate::update::update(*engine, path, sigma, ctx, v),
        Term::Native(native, args) => crate::prelude::run_native(*native, args, ctx, v),
    }
}

/// Feed every output of `xs` together with the input `v` to `f`.
///
/// When `xs` provably has exactly one output, `v` is moved rather than
/// cloned, so that `f` may modify it in place.
fn for_each_output<'a, F>(mut xs: Stream<'a>, v: Value, f: F) -> Stream<'a>
where
    F: Fn(ValueResult, Value) -> Stream<'a> + 'a,
{
    if xs.bounds() == (1, Some(1)) {
        let x = xs.next().expect("stream bounds promised one element");
        drop(xs);
        return f(x, v);
    }
    Stream::new(xs.flat_map(move |x| f(x, v.clone())))
}

/// `l ∘ r`: the right operand is collected before the left one is evaluated,
/// and pairs are produced left-major.
fn run_cartesian<'a>(op: CartesianOp, l: &'a Term, r: &'a Term, ctx: Ctx, v: Value) -> Stream<'a> {
    let ys: Vec<ValueResult> = run(r, ctx.clone(), v.clone()).collect();
    let ls = run(l, ctx, v);
    match <[ValueResult; 1]>::try_from(ys) {
        Ok([y]) => Stream::new(ls.map(move |x| combine(op, x, y.clone()))),
        Err(ys) => {
            let ys = Rc::new(ys);
            Stream::new(ls.flat_map(move |x| pairs(op, x, ys.clone())))
        }
    }
}

fn combine(op: CartesianOp, x: ValueResult, y: ValueResult) -> ValueResult {
    cartesian(op, x?, y?)
}

/// `x ∘ y` for every `y`; the last pair takes `x` without cloning.
fn pairs<'a>(op: CartesianOp, x: ValueResult, ys: Rc<Vec<ValueResult>>) -> impl Iterator<Item = ValueResult> + 'a {
    let mut x = Some(x);
    let n = ys.len();
    (0..n).map(move |j| {
        let y = ys[j].clone();
        let x = if j + 1 == n { x.take().expect("last pair") } else { x.clone().expect("pair") };
        combine(op, x, y)
    })
}

/// The elements of `s` up to and including its first error.
pub(crate) fn collect_until_error(s: impl Iterator<Item = ValueResult>) -> Vec<ValueResult> {
    let mut out = Vec::new();
    for x in s {
        let stop = x.is_err();
        out.push(x);
        if stop {
            break;
        }
    }
    out
}

pub(crate) type Step<'a> = Rc<dyn Fn(Value, &Value) -> Stream<'a> + 'a>;

/// Fold `step` over `xs` starting from `init`.
///
/// Every output of a step starts its own branch. `Reduce` yields the states
/// that have consumed all of `xs`; `Foreach` yields every state, each before
/// the states derived from it. An error, as a state or among `xs`, ends its
/// branch with that error.
pub(crate) fn fold<'a>(kind: FoldKind, init: ValueResult, xs: Rc<Vec<ValueResult>>, step: Step<'a>) -> Fold<'a> {
    Fold { kind, xs, step, stack: vec![(0, Stream::once(init))] }
}

pub(crate) struct Fold<'a> {
    kind: FoldKind,
    xs: Rc<Vec<ValueResult>>,
    step: Step<'a>,
    // branches still to explore, with the number of `xs` their states consumed
    stack: Vec<(usize, Stream<'a>)>,
}

impl Iterator for Fold<'_> {
    type Item = ValueResult;

    fn next(&mut self) -> Option<ValueResult> {
        loop {
            let (depth, states) = self.stack.last_mut()?;
            let depth = *depth;
            let state = match states.next() {
                None => {
                    self.stack.pop();
                    continue;
                }
                Some(Err(e)) => return Some(Err(e)),
                Some(Ok(state)) => state,
            };
            let Some(x) = self.xs.get(depth) else {
                return Some(Ok(state));
            };
            let x = match x {
                Ok(x) => x.clone(),
                Err(e) if self.kind == FoldKind::Reduce => return Some(Err(e.clone())),
                Err(e) => {
                    self.stack.push((depth + 1, Stream::once(Err(e.clone()))));
                    return Some(Ok(state));
                }
            };
            let step = self.step.clone();
            match self.kind {
                FoldKind::Reduce => self.stack.push((depth + 1, step(state, &x))),
                FoldKind::Foreach => {
                    let out = state.clone();
                    self.stack.push((depth + 1, Stream::lazy(move || step(state, &x))));
                    return Some(Ok(out));
                }
            }
        }
    }
}

pub(crate) fn type_error(what: &str, v: &Value) -> Error {
    Error::new(format!("{what}: unexpected {}", crate::value::brief(v)))
}
