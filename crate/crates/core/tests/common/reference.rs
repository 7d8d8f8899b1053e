//! A direct, eager reading of the evaluation and update tables over named
//! filters. Variables live in an environment and calls are closures, so no
//! substitution or renaming is involved. Used as an oracle for inlining.

use jqlet::syntax::{ComplexOp, FoldKind};
use jqlet::{cartesian, Definition, Error, Filter, Value, ValueResult};
use std::rc::Rc;

#[derive(Clone)]
enum Fun {
    /// A definition, closed over the definitions before it.
    Def(Rc<Definition>, Env),
    /// A call argument, closed over the caller's environment.
    Arg(Rc<Filter>, Env),
}

#[derive(Clone, Default)]
pub struct Env {
    vars: Option<Rc<(String, ValueResult, Env)>>,
    funs: Option<Rc<(String, usize, Fun, Env)>>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_defs(defs: &[Definition]) -> Self {
        defs.iter().fold(Self::new(), |env, d| {
            let f = Fun::Def(Rc::new(d.clone()), env.clone());
            env.bind_fun(&d.name, d.params.len(), f)
        })
    }

    pub fn bind(&self, x: &str, v: ValueResult) -> Self {
        Self { vars: Some(Rc::new((x.to_string(), v, self.clone()))), funs: self.funs.clone() }
    }

    fn bind_fun(&self, name: &str, arity: usize, f: Fun) -> Self {
        Self { vars: self.vars.clone(), funs: Some(Rc::new((name.to_string(), arity, f, self.clone()))) }
    }

    fn var(&self, x: &str) -> ValueResult {
        let mut cur = &self.vars;
        while let Some(node) = cur {
            if node.0 == x {
                return node.1.clone();
            }
            cur = &node.2.vars;
        }
        panic!("unbound ${x}")
    }

    fn fun(&self, name: &str, arity: usize) -> Option<Fun> {
        let mut cur = &self.funs;
        while let Some(node) = cur {
            if node.0 == name && node.1 == arity {
                return Some(node.2.clone());
            }
            cur = &node.3.funs;
        }
        None
    }

    /// Definitions only, as seen from inside a definition body.
    fn without_vars(&self) -> Self {
        Self { vars: None, funs: self.funs.clone() }
    }
}

fn err(msg: &str) -> ValueResult {
    Err(Error::new(msg))
}

fn ite(x: &ValueResult, pivot: bool) -> Option<bool> {
    match x {
        Err(_) => None,
        Ok(v) => Some(*v == Value::Bool(pivot)),
    }
}

pub fn eval(f: &Filter, env: &Env, v: ValueResult) -> Vec<ValueResult> {
    let v = match v {
        Ok(v) => v,
        Err(e) => return vec![Err(e)],
    };
    let ev = |g: &Filter, x: ValueResult| eval(g, env, x);
    match f {
        Filter::Int(n) => vec![Ok(Value::Int(*n))],
        Filter::Var(x) => vec![env.var(x)],
        Filter::Identity => vec![Ok(v)],
        Filter::IterAll => match &v {
            Value::Arr(xs) => xs.iter().cloned().map(Ok).collect(),
            _ => vec![err("iterate")],
        },
        Filter::Index(i) => ev(i, Ok(v.clone())).into_iter().map(|i| index(&v, i)).collect(),
        Filter::Collect(g) => {
            let xs: Result<Vec<Value>, Error> = ev(g, Ok(v)).into_iter().collect();
            vec![xs.map(Value::from_vec)]
        }
        Filter::Try(g) => ev(g, Ok(v)).into_iter().filter(Result::is_ok).collect(),
        Filter::Complex(ComplexOp::Comma, l, r) => {
            let mut out = ev(l, Ok(v.clone()));
            out.extend(ev(r, Ok(v)));
            out
        }
        Filter::Complex(ComplexOp::Pipe, l, r) => ev(l, Ok(v)).into_iter().flat_map(|x| ev(r, x)).collect(),
        Filter::Complex(ComplexOp::And, l, r) => ev(l, Ok(v.clone()))
            .into_iter()
            .flat_map(|x| match ite(&x, false) {
                None => vec![x],
                Some(true) => vec![Ok(Value::Bool(false))],
                Some(false) => ev(r, Ok(v.clone())),
            })
            .collect(),
        Filter::Complex(ComplexOp::Or, l, r) => ev(l, Ok(v.clone()))
            .into_iter()
            .flat_map(|x| match ite(&x, true) {
                None => vec![x],
                Some(true) => vec![Ok(Value::Bool(true))],
                Some(false) => ev(r, Ok(v.clone())),
            })
            .collect(),
        Filter::Complex(ComplexOp::Update, mu, sigma) => {
            let apply = |x: Value| eval(sigma, env, Ok(x));
            update(mu, env, &apply, v)
        }
        Filter::Cartesian(op, l, r) => {
            let mut out = Vec::new();
            for x in ev(l, Ok(v.clone())) {
                for y in ev(r, Ok(v.clone())) {
                    out.push(x.clone().and_then(|x| cartesian(*op, x, y?)));
                }
            }
            out
        }
        Filter::IfThenElse(c, t, e) => ev(c, Ok(v.clone()))
            .into_iter()
            .flat_map(|x| match ite(&x, true) {
                None => vec![x],
                Some(true) => ev(t, Ok(v.clone())),
                Some(false) => ev(e, Ok(v.clone())),
            })
            .collect(),
        Filter::Bind(g, x, body) => ev(g, Ok(v.clone()))
            .into_iter()
            .flat_map(|y| eval(body, &env.bind(x, y), Ok(v.clone())))
            .collect(),
        Filter::Fold(kind, xs, x, init, step) => {
            let xs = until_error(ev(xs, Ok(v.clone())));
            ev(init, Ok(v))
                .into_iter()
                .flat_map(|i| fold(*kind, i, &xs, &|state, y| eval(step, &env.bind(x, Ok(y.clone())), Ok(state))))
                .collect()
        }
        Filter::Call(name, args) => match env.fun(name, args.len()) {
            Some(Fun::Arg(g, genv)) => eval(&g, &genv, Ok(v)),
            Some(Fun::Def(d, denv)) => eval(&d.body, &call_env(&d, &denv, args, env), Ok(v)),
            None => native(name, args, env, v),
        },
    }
}

fn call_env(d: &Definition, denv: &Env, args: &[Filter], caller: &Env) -> Env {
    d.params.iter().zip(args).fold(denv.without_vars(), |e, (p, a)| {
        e.bind_fun(p, 0, Fun::Arg(Rc::new(a.clone()), caller.clone()))
    })
}

fn index(v: &Value, i: ValueResult) -> ValueResult {
    let i = i?;
    match (v, i) {
        (Value::Arr(xs), Value::Int(i)) => {
            let len = xs.len() as i64;
            let j = if i < 0 { len + i } else { i };
            if (0..len).contains(&j) {
                Ok(xs[j as usize].clone())
            } else {
                err("index out of range")
            }
        }
        _ => err("index"),
    }
}

fn until_error(xs: Vec<ValueResult>) -> Vec<ValueResult> {
    let mut out = Vec::new();
    for x in xs {
        let stop = x.is_err();
        out.push(x);
        if stop {
            break;
        }
    }
    out
}

/// The fold recurrence; an error state or source element ends its branch with one error.
fn fold(kind: FoldKind, state: ValueResult, xs: &[ValueResult], step: &dyn Fn(Value, &Value) -> Vec<ValueResult>) -> Vec<ValueResult> {
    let state = match state {
        Ok(s) => s,
        Err(e) => return vec![Err(e)],
    };
    let Some((x, rest)) = xs.split_first() else {
        return vec![Ok(state)];
    };
    let mut out = match kind {
        FoldKind::Reduce => vec![],
        FoldKind::Foreach => vec![Ok(state.clone())],
    };
    match x {
        Err(e) => out.push(Err(e.clone())),
        Ok(x) => {
            for s in step(state, x) {
                out.extend(fold(kind, s, rest, step));
            }
        }
    }
    out
}

fn native(name: &str, args: &[Filter], env: &Env, v: Value) -> Vec<ValueResult> {
    let ev = |g: &Filter, x: Value| eval(g, env, Ok(x));
    match (name, args) {
        ("empty", []) => vec![],
        ("null", []) => vec![Ok(Value::Null)],
        ("isarr", []) => vec![Ok(Value::Bool(v.is_array()))],
        ("reverse" | "sort", []) => vec![match v {
            Value::Arr(xs) => {
                let mut xs = xs.to_vec();
                if name == "sort" {
                    xs.sort();
                } else {
                    xs.reverse();
                }
                Ok(Value::from_vec(xs))
            }
            _ => err(name),
        }],
        ("range", [n]) => ev(n, v)
            .into_iter()
            .flat_map(|n| match n {
                Ok(Value::Int(n)) => (0..n).map(|i| Ok(Value::Int(i))).collect(),
                Ok(_) => vec![err("range")],
                Err(e) => vec![Err(e)],
            })
            .collect(),
        ("limit", [n, f]) => ev(n, v.clone())
            .into_iter()
            .flat_map(|n| match n {
                Ok(Value::Int(n)) => ev(f, v.clone()).into_iter().take(n.max(0) as usize).collect(),
                Ok(_) => vec![err("limit")],
                Err(e) => vec![Err(e)],
            })
            .collect(),
        ("recurse", [f]) => {
            let mut out = vec![Ok(v.clone())];
            for x in ev(f, v) {
                match x {
                    Ok(x) => out.extend(native(name, args, env, x)),
                    Err(e) => out.push(Err(e)),
                }
            }
            out
        }
        _ => panic!("unknown filter {name}/{}", args.len()),
    }
}

/// `mu |= sigma` on `v`; `sigma` keeps whatever environment it was built in.
pub fn update(mu: &Filter, env: &Env, sigma: &dyn Fn(Value) -> Vec<ValueResult>, v: Value) -> Vec<ValueResult> {
    let then = |r: Vec<ValueResult>, g: &dyn Fn(Value) -> Vec<ValueResult>| -> Vec<ValueResult> {
        r.into_iter()
            .flat_map(|x| match x {
                Ok(x) => g(x),
                Err(e) => vec![Err(e)],
            })
            .collect()
    };
    let reduce = |xs: Vec<ValueResult>, step: &dyn Fn(Value, &Value) -> Vec<ValueResult>| {
        fold(FoldKind::Reduce, Ok(v.clone()), &until_error(xs), step)
    };
    match mu {
        Filter::Identity => sigma(v),
        Filter::Complex(ComplexOp::Pipe, f, g) => update(f, env, &|x| update(g, env, sigma, x), v),
        Filter::Complex(ComplexOp::Comma, f, g) => then(update(f, env, sigma, v), &|x| update(g, env, sigma, x)),
        Filter::Bind(f, x, g) => {
            let xs = eval(f, env, Ok(v.clone()));
            reduce(xs, &|s, y| update(g, &env.bind(x, Ok(y.clone())), sigma, s))
        }
        Filter::IfThenElse(c, t, e) => {
            let xs = eval(c, env, Ok(v.clone()));
            reduce(xs, &|s, y| update(if *y == Value::Bool(true) { t } else { e }, env, sigma, s))
        }
        Filter::Index(f) => {
            let xs = eval(f, env, Ok(v.clone()));
            reduce(xs, &|s, i| vec![splice(s, i, sigma)])
        }
        Filter::IterAll => match v {
            Value::Arr(xs) => {
                let out: Result<Vec<Value>, Error> =
                    xs.iter().flat_map(|x| sigma(x.clone())).collect();
                vec![out.map(Value::from_vec)]
            }
            _ => vec![err("iterate")],
        },
        Filter::Call(name, args) => match env.fun(name, args.len()) {
            Some(Fun::Arg(g, genv)) => update(&g, &genv, sigma, v),
            Some(Fun::Def(d, denv)) => update(&d.body, &call_env(&d, &denv, args, env), sigma, v),
            None => match (name.as_str(), args.as_slice()) {
                ("empty", []) => vec![Ok(v)],
                ("recurse", [f]) => then(sigma(v), &|x| update(f, env, &|y| update(mu, env, sigma, y), x)),
                _ => vec![err("not a path")],
            },
        },
        _ => vec![err("not a path")],
    }
}

fn splice(v: Value, i: &Value, sigma: &dyn Fn(Value) -> Vec<ValueResult>) -> ValueResult {
    let (Value::Arr(xs), Value::Int(i)) = (&v, i) else {
        return err("splice");
    };
    let len = xs.len() as i64;
    let j = if *i < 0 { len + i } else { *i };
    if !(0..len).contains(&j) {
        return err("splice out of range");
    }
    let j = j as usize;
    let mut out = xs[..j].to_vec();
    for x in sigma(xs[j].clone()) {
        out.push(x?);
    }
    out.extend(xs[j + 1..].iter().cloned());
    Ok(Value::from_vec(out))
}
