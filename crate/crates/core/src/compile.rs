//! Substitution, inlining of defined filters, and resolution of variables
//! to binder distances.

use crate::prelude::{self, Native};
use crate::syntax::{self, ComplexOp, Definition, Filter, FoldKind, ParseError};
use crate::update::Engine;
use crate::value::CartesianOp;
use std::collections::HashMap;

/// A filter in which every variable is a binder distance, every call to a
/// defined filter has been inlined, and only native calls remain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Int(i64),
    /// Number of binders between the use and its binder.
    Var(usize),
    Identity,
    IterAll,
    Index(Box<Term>),
    Collect(Box<Term>),
    Try(Box<Term>),
    Pipe(Box<Term>, Box<Term>),
    Comma(Box<Term>, Box<Term>),
    Or(Box<Term>, Box<Term>),
    And(Box<Term>, Box<Term>),
    Update(Engine, Box<Term>, Box<Term>),
    Cartesian(CartesianOp, Box<Term>, Box<Term>),
    IfThenElse(Box<Term>, Box<Term>, Box<Term>),
    /// `f as $x | body`; `body` sees the bound value at distance 0.
    Bind(Box<Term>, Box<Term>),
    /// Fold source, initial state, and step; the step sees `$x` at distance 0.
    Fold(FoldKind, Box<Term>, Box<Term>, Box<Term>),
    Native(Native, Vec<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("{name}/{arity} is not defined")]
    Unknown { name: String, arity: usize },
    #[error("{name}/{arity} is recursive; recursive definitions are not supported")]
    Recursive { name: String, arity: usize },
    #[error("{name}/{arity} calls {callee}/{callee_arity}, which is defined later")]
    ForwardReference {
        name: String,
        arity: usize,
        callee: String,
        callee_arity: usize,
    },
    #[error("${0} is not bound")]
    Unbound(String),
    #[error("{name}/{arity} is already defined")]
    Duplicate { name: String, arity: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Resolve(#[from] ResolveError),
}

/// Source of fresh variable names.
///
/// A fresh name is the hint's base name, a `~`, and a per-base counter.
/// `~` cannot appear in source text, so fresh names never collide with
/// user-written ones.
#[derive(Debug, Default)]
pub struct FreshNames(HashMap<String, usize>);

impl FreshNames {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, hint: &str) -> String {
        let base = hint.split('~').next().unwrap_or(hint);
        let n = self.0.entry(base.to_string()).or_default();
        *n += 1;
        format!("{base}~{n}")
    }
}

/// Maps variables and parameter names (nullary calls) to filters.
#[derive(Clone, Debug, Default)]
pub struct Substitution {
    pub vars: HashMap<String, Filter>,
    pub calls: HashMap<String, Filter>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(mut self, x: impl Into<String>, f: Filter) -> Self {
        self.vars.insert(x.into(), f);
        self
    }

    pub fn call(mut self, x: impl Into<String>, f: Filter) -> Self {
        self.calls.insert(x.into(), f);
        self
    }
}

/// Apply `sigma` to `phi`, renaming every variable bound in `phi` to a
/// fresh one so that free variables of the substituted filters cannot be
/// captured.
pub fn substitute(phi: &Filter, sigma: &Substitution, fresh: &mut FreshNames) -> Filter {
    use Filter::*;
    let mut sub = |f: &Filter| substitute(f, sigma, fresh);
    match phi {
        Int(_) | Identity | IterAll => phi.clone(),
        Var(x) => sigma.vars.get(x).cloned().unwrap_or_else(|| phi.clone()),
        Call(x, args) if args.is_empty() => sigma.calls.get(x).cloned().unwrap_or_else(|| phi.clone()),
        Call(x, args) => Call(x.clone(), args.iter().map(sub).collect()),
        Index(f) => Index(Box::new(sub(f))),
        Collect(f) => Collect(Box::new(sub(f))),
        Try(f) => Try(Box::new(sub(f))),
        Complex(op, l, r) => Filter::complex(*op, sub(l), sub(r)),
        Cartesian(op, l, r) => Filter::cartesian(*op, sub(l), sub(r)),
        IfThenElse(c, t, e) => Filter::if_then_else(sub(c), sub(t), sub(e)),
        Bind(f, x, g) => {
            let f = sub(f);
            let x2 = fresh.fresh(x);
            let inner = sigma.clone().var(x.clone(), Var(x2.clone()));
            Filter::bind(f, x2, substitute(g, &inner, fresh))
        }
        Fold(kind, xs, x, init, step) => {
            let xs = sub(xs);
            let init = sub(init);
            let x2 = fresh.fresh(x);
            let inner = sigma.clone().var(x.clone(), Var(x2.clone()));
            Filter::fold(*kind, xs, x2, init, substitute(step, &inner, fresh))
        }
    }
}

/// Definitions available to programs, checked for recursion and scoping
/// when added.
#[derive(Clone, Debug, Default)]
pub struct Compiler {
    defs: HashMap<(String, usize), Definition>,
    engine: Engine,
}

impl Compiler {
    /// A compiler that knows only the native filters.
    pub fn new() -> Self {
        Self::default()
    }

    /// A compiler that knows the natives and the standard definitions.
    pub fn with_prelude() -> Self {
        let mut c = Self::new();
        let defs = syntax::parse_defs(prelude::DEFINITIONS).expect("prelude parses");
        c.add_defs(defs).expect("prelude resolves");
        c
    }

    /// Select the engine used for `|=`.
    pub fn engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    /// Add definitions. Each may call natives, earlier definitions, and its
    /// own parameters; it may not refer to variables bound outside its body.
    pub fn add_defs(&mut self, defs: Vec<Definition>) -> Result<(), ResolveError> {
        for (i, def) in defs.iter().enumerate() {
            let key = (def.name.clone(), def.params.len());
            if self.defs.contains_key(&key) || prelude::native(&def.name, def.params.len()).is_some() {
                return Err(ResolveError::Duplicate { name: key.0, arity: key.1 });
            }
            let mut vars = Vec::new();
            if let Err(e) = self.check(&def.body, &def.params, &mut vars) {
                return Err(match e {
                    ResolveError::Unknown { name, arity } => self.classify(&defs, i, name, arity),
                    e => e,
                });
            }
            self.defs.insert(key, def.clone());
        }
        Ok(())
    }

    /// Explain an unknown call from `defs[i]` that names a later definition.
    fn classify(&self, defs: &[Definition], i: usize, name: String, arity: usize) -> ResolveError {
        let find = |name: &str, arity: usize| {
            defs.iter()
                .position(|d| d.name == name && d.params.len() == arity)
                .filter(|j| *j >= i)
        };
        let Some(j) = find(&name, arity) else {
            return ResolveError::Unknown { name, arity };
        };
        // is `defs[i]` reachable from `defs[j]` through calls among the batch?
        let mut seen = vec![false; defs.len()];
        let mut todo = vec![j];
        while let Some(k) = todo.pop() {
            if k == i {
                let d = &defs[i];
                return ResolveError::Recursive { name: d.name.clone(), arity: d.params.len() };
            }
            if std::mem::replace(&mut seen[k], true) {
                continue;
            }
            let mut calls = Vec::new();
            collect_calls(&defs[k].body, &defs[k].params, &mut calls);
            todo.extend(calls.into_iter().filter_map(|(n, a)| find(&n, a)));
        }
        ResolveError::ForwardReference {
            name: defs[i].name.clone(),
            arity: defs[i].params.len(),
            callee: name,
            callee_arity: arity,
        }
    }

    fn check(&self, f: &Filter, params: &[String], vars: &mut Vec<String>) -> Result<(), ResolveError> {
        use Filter::*;
        match f {
            Int(_) | Identity | IterAll => Ok(()),
            Var(x) => {
                if vars.contains(x) {
                    Ok(())
                } else {
                    Err(ResolveError::Unbound(x.clone()))
                }
            }
            Call(x, args) => {
                let known = (args.is_empty() && params.contains(x))
                    || self.defs.contains_key(&(x.clone(), args.len()))
                    || prelude::native(x, args.len()).is_some();
                if !known {
                    return Err(ResolveError::Unknown { name: x.clone(), arity: args.len() });
                }
                args.iter().try_for_each(|a| self.check(a, params, vars))
            }
            Index(f) | Collect(f) | Try(f) => self.check(f, params, vars),
            Complex(_, l, r) | Cartesian(_, l, r) => {
                self.check(l, params, vars)?;
                self.check(r, params, vars)
            }
            IfThenElse(c, t, e) => {
                self.check(c, params, vars)?;
                self.check(t, params, vars)?;
                self.check(e, params, vars)
            }
            Bind(f, x, body) => {
                self.check(f, params, vars)?;
                vars.push(x.clone());
                let r = self.check(body, params, vars);
                vars.pop();
                r
            }
            Fold(_, xs, x, init, step) => {
                self.check(xs, params, vars)?;
                self.check(init, params, vars)?;
                vars.push(x.clone());
                let r = self.check(step, params, vars);
                vars.pop();
                r
            }
        }
    }

    /// Replace every call to a defined filter by its body, with the call's
    /// arguments substituted for the parameters.
    pub fn inline(&self, f: &Filter, fresh: &mut FreshNames) -> Result<Filter, ResolveError> {
        use Filter::*;
        let mut go = |f: &Filter| self.inline(f, fresh);
        Ok(match f {
            Int(_) | Var(_) | Identity | IterAll => f.clone(),
            Call(x, args) => {
                if let Some(def) = self.defs.get(&(x.clone(), args.len())) {
                    let sigma = def
                        .params
                        .iter()
                        .zip(args)
                        .fold(Substitution::new(), |s, (p, a)| s.call(p.clone(), a.clone()));
                    let body = substitute(&def.body, &sigma, fresh);
                    return self.inline(&body, fresh);
                }
                if prelude::native(x, args.len()).is_none() {
                    return Err(ResolveError::Unknown { name: x.clone(), arity: args.len() });
                }
                Call(x.clone(), args.iter().map(go).collect::<Result<_, _>>()?)
            }
            Index(f) => Index(Box::new(go(f)?)),
            Collect(f) => Collect(Box::new(go(f)?)),
            Try(f) => Try(Box::new(go(f)?)),
            Complex(op, l, r) => Filter::complex(*op, go(l)?, go(r)?),
            Cartesian(op, l, r) => Filter::cartesian(*op, go(l)?, go(r)?),
            IfThenElse(c, t, e) => Filter::if_then_else(go(c)?, go(t)?, go(e)?),
            Bind(f, x, body) => Filter::bind(go(f)?, x.clone(), go(body)?),
            Fold(kind, xs, x, init, step) => Filter::fold(*kind, go(xs)?, x.clone(), go(init)?, go(step)?),
        })
    }

    /// Resolve variables to binder distances and natives to their tags.
    /// `f` must not contain calls to defined filters.
    pub fn resolve(&self, f: &Filter, vars: &mut Vec<String>) -> Result<Term, ResolveError> {
        use Filter::*;
        let bx = Box::new;
        Ok(match f {
            Int(n) => Term::Int(*n),
            Identity => Term::Identity,
            IterAll => Term::IterAll,
            Var(x) => match vars.iter().rev().position(|y| y == x) {
                Some(d) => Term::Var(d),
                None => return Err(ResolveError::Unbound(x.clone())),
            },
            Call(x, args) => {
                let native = prelude::native(x, args.len())
                    .ok_or_else(|| ResolveError::Unknown { name: x.clone(), arity: args.len() })?;
                let args = args.iter().map(|a| self.resolve(a, vars)).collect::<Result<_, _>>()?;
                Term::Native(native.native, args)
            }
            Index(f) => Term::Index(bx(self.resolve(f, vars)?)),
            Collect(f) => Term::Collect(bx(self.resolve(f, vars)?)),
            Try(f) => Term::Try(bx(self.resolve(f, vars)?)),
            Complex(op, l, r) => {
                let l = bx(self.resolve(l, vars)?);
                let r = bx(self.resolve(r, vars)?);
                match op {
                    ComplexOp::Pipe => Term::Pipe(l, r),
                    ComplexOp::Comma => Term::Comma(l, r),
                    ComplexOp::Update => Term::Update(self.engine, l, r),
                    ComplexOp::Or => Term::Or(l, r),
                    ComplexOp::And => Term::And(l, r),
                }
            }
            Cartesian(op, l, r) => Term::Cartesian(*op, bx(self.resolve(l, vars)?), bx(self.resolve(r, vars)?)),
            IfThenElse(c, t, e) => Term::IfThenElse(
                bx(self.resolve(c, vars)?),
                bx(self.resolve(t, vars)?),
                bx(self.resolve(e, vars)?),
            ),
            Bind(f, x, body) => {
                let f = self.resolve(f, vars)?;
                vars.push(x.clone());
                let body = self.resolve(body, vars);
                vars.pop();
                Term::Bind(bx(f), bx(body?))
            }
            Fold(kind, xs, x, init, step) => {
                let xs = self.resolve(xs, vars)?;
                let init = self.resolve(init, vars)?;
                vars.push(x.clone());
                let step = self.resolve(step, vars);
                vars.pop();
                Term::Fold(*kind, bx(xs), bx(init), bx(step?))
            }
        })
    }

    /// Inline and resolve a closed filter.
    pub fn compile(&self, f: &Filter) -> Result<Compiled, ResolveError> {
        let mut fresh = FreshNames::new();
        let inlined = self.inline(f, &mut fresh)?;
        let term = self.resolve(&inlined, &mut Vec::new())?;
        let warnings = path_warnings(&term);
        Ok(Compiled { term, warnings })
    }

    /// Parse and compile a program, which may start with its own definitions.
    pub fn compile_text(&self, text: &str) -> Result<Compiled, CompileError> {
        let (defs, main) = syntax::parse_program(text)?;
        if defs.is_empty() {
            return Ok(self.compile(&main)?);
        }
        let mut local = self.clone();
        local.add_defs(defs)?;
        Ok(local.compile(&main)?)
    }
}

fn collect_calls(f: &Filter, params: &[String], out: &mut Vec<(String, usize)>) {
    use Filter::*;
    match f {
        Int(_) | Var(_) | Identity | IterAll => {}
        Call(x, args) => {
            if !(args.is_empty() && params.contains(x)) {
                out.push((x.clone(), args.len()));
            }
            args.iter().for_each(|a| collect_calls(a, params, out));
        }
        Index(f) | Collect(f) | Try(f) => collect_calls(f, params, out),
        Complex(_, l, r) | Cartesian(_, l, r) | Bind(l, _, r) => {
            collect_calls(l, params, out);
            collect_calls(r, params, out);
        }
        IfThenElse(a, b, c) | Fold(_, a, _, b, c) => {
            collect_calls(a, params, out);
            collect_calls(b, params, out);
            collect_calls(c, params, out);
        }
    }
}

/// Inline the calls in `f` to the given definitions and resolve it.
pub fn inline_calls(f: &Filter, defs: &[Definition]) -> Result<Term, ResolveError> {
    let mut c = Compiler::new();
    c.add_defs(defs.to_vec())?;
    Ok(c.compile(f)?.term)
}

/// Whether `t` can denote positions inside its input.
pub fn is_path(t: &Term) -> bool {
    match t {
        Term::Identity | Term::IterAll | Term::Index(_) => true,
        Term::Pipe(l, r) | Term::Comma(l, r) => is_path(l) && is_path(r),
        Term::Bind(_, body) => is_path(body),
        Term::IfThenElse(_, t, e) => is_path(t) && is_path(e),
        Term::Native(n, args) => n.path_capable() && args.iter().all(is_path),
        _ => false,
    }
}

fn path_warnings(t: &Term) -> Vec<String> {
    fn go(t: &Term, out: &mut Vec<String>) {
        use Term::*;
        match t {
            Int(_) | Var(_) | Identity | IterAll => {}
            Index(a) | Collect(a) | Try(a) => go(a, out),
            Pipe(a, b) | Comma(a, b) | Or(a, b) | And(a, b) | Cartesian(_, a, b) | Bind(a, b) => {
                go(a, out);
                go(b, out);
            }
            Update(_, a, b) => {
                if !is_path(a) {
                    out.push("left-hand side of `|=` may not be a path expression".into());
                }
                go(a, out);
                go(b, out);
            }
            IfThenElse(a, b, c) | Fold(_, a, b, c) => {
                go(a, out);
                go(b, out);
                go(c, out);
            }
            Native(_, args) => args.iter().for_each(|a| go(a, out)),
        }
    }
    let mut out = Vec::new();
    go(t, &mut out);
    out
}

/// A compiled filter, ready to run on any number of inputs.
#[derive(Clone, Debug)]
pub struct Compiled {
    term: Term,
    warnings: Vec<String>,
}

impl Compiled {
    pub fn term(&self) -> &Term {
        &self.term
    }

    /// Diagnostics found statically, such as update targets that are not paths.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn run(&self, v: crate::Value) -> crate::Stream<'_> {
        crate::eval::eval(&self.term, crate::Ctx::new(), Ok(v))
    }
}
