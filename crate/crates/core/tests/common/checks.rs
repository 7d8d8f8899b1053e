//! Property checks, each run for a given number of seeded random cases.

use super::gen::*;
use super::reference;
use jqlet::syntax::{ComplexOp, FoldKind};
use jqlet::{CartesianOp, Compiler, Ctx, Definition, Engine, Error, Filter, Value, ValueResult};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type Check = Result<(), String>;

fn check<S: Strategy>(cases: u32, seed: u64, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Check {
    runner(cases, seed).run(&strategy, test).map_err(|e| e.to_string())
}

fn eval_with(compiler: &Compiler, f: &Filter, v: &Value) -> Vec<ValueResult> {
    let c = compiler.compile(f).unwrap_or_else(|e| panic!("{f}: {e}"));
    c.run(v.clone()).collect()
}

/// Outputs of a closed filter that uses only natives.
pub fn eval(f: &Filter, v: &Value) -> Vec<ValueResult> {
    eval_with(&Compiler::new(), f, v)
}

fn reference(f: &Filter, v: &Value) -> Vec<ValueResult> {
    reference::eval(f, &reference::Env::new(), Ok(v.clone()))
}

fn same(name: &str, lhs: &Filter, rhs: &Filter, v: &Value) -> Result<(), TestCaseError> {
    let (l, r) = (eval(lhs, v), eval(rhs, v));
    prop_assert_eq!(&l, &r, "{}: `{}` vs `{}` on {}", name, lhs, rhs, v);
    Ok(())
}

fn var(x: &str) -> Filter {
    Filter::var(x)
}

type Shape<'a> = Box<dyn Fn(Filter) -> Filter + 'a>;

/// Binding elimination: `phi(f)` equals `f as $v | phi($v)` for every
/// shape whose evaluation sums over the outputs of `f`.
pub fn binding_elimination(cases: u32) -> Check {
    let strategy = (arb_filter(), arb_filter(), arb_filter(), arb_filter(), prop::sample::select(&CartesianOp::ALL[..]), arb_env(), arb_value());
    check(cases, 0x1e44a1, strategy, |(f, g, h, xs, op, env, v)| {
        let fv = var("bound");
        let shapes: Vec<(&str, Shape)> = vec![
            ("pipe", Box::new(|f| Filter::pipe(f, g.clone()))),
            ("cartesian", Box::new(|f| Filter::cartesian(op, f, g.clone()))),
            ("try", Box::new(|f| Filter::Try(Box::new(f)))),
            ("and", Box::new(|f| Filter::complex(ComplexOp::And, f, g.clone()))),
            ("or", Box::new(|f| Filter::complex(ComplexOp::Or, f, g.clone()))),
            ("if", Box::new(|f| Filter::if_then_else(f, g.clone(), h.clone()))),
            ("index", Box::new(|f| Filter::Index(Box::new(f)))),
            ("reduce init", Box::new(|f| Filter::fold(FoldKind::Reduce, limited(3, xs.clone()), "x", f, limited(2, g.clone())))),
            ("foreach init", Box::new(|f| Filter::fold(FoldKind::Foreach, limited(3, xs.clone()), "y", f, limited(2, h.clone())))),
        ];
        for (name, phi) in shapes {
            let direct = close(phi(f.clone()), &env);
            let bound = close(Filter::bind(f.clone(), "bound", phi(fv.clone())), &env);
            same(name, &direct, &bound, &v)?;
        }
        Ok(())
    })
}

/// `reduce`/`foreach` equal their expansion into pipes and bindings.
pub fn fold_expansion(cases: u32) -> Check {
    let kind = prop_oneof![Just(FoldKind::Reduce), Just(FoldKind::Foreach)];
    let x = prop::sample::select(&VARS[..]);
    let strategy = (kind, arb_filter(), x, arb_filter(), arb_filter(), arb_env(), arb_value());
    check(cases, 0xf01d, strategy, |(kind, xs, x, init, step, env, v)| {
        let (xs, step) = (limited(3, xs), limited(2, step));
        let elements = eval(&close(xs.clone(), &env), &v);
        let expansion = elements.iter().rev().fold(Filter::Identity, |rest, e| {
            let consume = match e {
                Ok(e) => Filter::bind(literal(e), x, Filter::pipe(step.clone(), rest)),
                Err(_) => failing(),
            };
            match kind {
                FoldKind::Reduce => consume,
                FoldKind::Foreach => Filter::comma(Filter::Identity, consume),
            }
        });
        let expansion = match (kind, elements.is_empty()) {
            // with no elements, foreach yields the initial state once
            (FoldKind::Foreach, true) => Filter::Identity,
            _ => expansion,
        };
        let folded = close(Filter::fold(kind, xs, x, init.clone(), step), &env);
        let expanded = close(Filter::pipe(init, expansion), &env);
        same(kind.keyword(), &folded, &expanded, &v)?;
        prop_assert_eq!(eval(&folded, &v), reference(&folded, &v));
        Ok(())
    })
}

/// `. |= f` equals `f`, and `.[] |= f` equals `[.[] | f]` on arrays.
pub fn update_laws(cases: u32) -> Check {
    check(cases, 0x0bda7e, (arb_filter(), arb_env(), arb_value(), arb_array()), |(f, env, v, a)| {
        let id = close(Filter::complex(ComplexOp::Update, Filter::Identity, f.clone()), &env);
        same("identity", &id, &close(f.clone(), &env), &v)?;
        let map = close(Filter::complex(ComplexOp::Update, Filter::IterAll, f.clone()), &env);
        let collect = close(Filter::Collect(Box::new(Filter::pipe(Filter::IterAll, f))), &env);
        same("map", &map, &collect, &a)
    })
}

/// Arguments passed to definitions keep referring to the caller's
/// variables, however the definition body rebinds them.
pub fn capture_freedom(cases: u32) -> Check {
    let strategy = (arb_filter(), arb_filter(), arb_filter(), arb_filter(), arb_env(), arb_env(), arb_value());
    check(cases, 0xca97, strategy, |(phi1, phi2, psi1, psi2, env, inner, v)| {
        let call = |name: &str, args: Vec<Filter>| Filter::call(name, args);
        // def f(g): <bind x, y, z> phi1 as $x | (g, phi2);
        let f_body = close(Filter::bind(phi1, "x", Filter::comma(call("g", vec![]), phi2)), &inner);
        // def k(a; b): [f(a), f(b | a)] as $y | $y, b;
        let k_body = Filter::bind(
            Filter::Collect(Box::new(Filter::comma(
                call("f", vec![call("a", vec![])]),
                call("f", vec![Filter::pipe(call("b", vec![]), call("a", vec![]))]),
            ))),
            "y",
            Filter::comma(var("y"), call("b", vec![])),
        );
        let defs = vec![
            Definition { name: "f".into(), params: vec!["g".into()], body: f_body },
            Definition { name: "k".into(), params: vec!["a".into(), "b".into()], body: k_body },
        ];
        let main = close(call("k", vec![psi1, psi2]), &env);

        let mut compiler = Compiler::new();
        compiler.add_defs(defs.clone()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let inlined = eval_with(&compiler, &main, &v);
        let expected = reference::eval(&main, &reference::Env::with_defs(&defs), Ok(v.clone()));
        prop_assert_eq!(inlined, expected, "{}", main);
        Ok(())
    })
}

/// Rendering a filter and parsing it back yields the same filter.
pub fn parser_round_trip(cases: u32) -> Check {
    check(cases, 0x9a55e, arb_filter(), |f| {
        let text = f.render();
        let parsed = jqlet::parse_filter(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(parsed, f, "{}", text);
        Ok(())
    })
}

/// Buffered `l ∘ r` equals the binding-based definition `l as $a | r as $b | $a ∘ $b`.
pub fn cartesian_buffering(cases: u32) -> Check {
    let strategy = (prop::sample::select(&CartesianOp::ALL[..]), arb_filter(), arb_filter(), arb_env(), arb_value());
    check(cases, 0xca27, strategy, |(op, l, r, env, v)| {
        let direct = close(Filter::cartesian(op, l.clone(), r.clone()), &env);
        let naive = Filter::bind(l, "cl", Filter::bind(r, "cr", Filter::cartesian(op, var("cl"), var("cr"))));
        same("cartesian", &direct, &close(naive, &env), &v)?;
        prop_assert_eq!(eval(&direct, &v), reference(&direct, &v));
        Ok(())
    })
}

/// The evaluator agrees with the reference evaluator on arbitrary filters.
pub fn reference_agreement(cases: u32) -> Check {
    check(cases, 0x4ef, (arb_filter(), arb_env(), arb_value()), |(f, env, v)| {
        let f = close(f, &env);
        prop_assert_eq!(eval(&f, &v), reference(&f, &v), "{}", f);
        Ok(())
    })
}

/// Every filter maps an error input to exactly that error.
pub fn error_input(cases: u32) -> Check {
    check(cases, 0xe44, (arb_filter(), arb_env()), |(f, env)| {
        let c = Compiler::new().compile(&close(f, &env)).unwrap();
        let out: Vec<_> = jqlet::eval(c.term(), Ctx::new(), Err(Error::new("input"))).collect();
        prop_assert_eq!(out.len(), 1);
        prop_assert_eq!(out[0].as_ref().map_err(Error::message), Err("input"));
        Ok(())
    })
}

/// Collecting a stream yields its leftmost error, for every placement of
/// errors in streams of up to `max_len` elements.
pub fn leftmost_error(max_len: usize) -> Check {
    for len in 0..=max_len {
        for mask in 0u32..1 << len {
            let stream: Vec<ValueResult> = (0..len)
                .map(|i| if mask & (1 << i) != 0 { Err(Error::new(i.to_string())) } else { Ok(Value::Int(i as i64)) })
                .collect();
            let got = jqlet::stream_to_array(stream.into_iter());
            let expected = match (0..len).find(|i| mask & (1 << i) != 0) {
                Some(i) => Err(i.to_string()),
                None => Ok(Value::from_vec((0..len as i64).map(Value::Int).collect())),
            };
            if got.map_err(|e| e.message().to_string()) != expected {
                return Err(format!("length {len}, error mask {mask:b}"));
            }
        }
    }
    Ok(())
}

fn update_outputs(engine: Engine, mu: &Filter, sigma: &Filter, env: &[Value], v: &Value) -> Vec<ValueResult> {
    let f = close(Filter::complex(ComplexOp::Update, mu.clone(), sigma.clone()), env);
    eval_with(&Compiler::new().engine(engine), &f, v)
}

/// On simple paths with length-preserving update filters, both engines agree.
pub fn engine_agreement(cases: u32) -> Check {
    check(cases, 0xe491, (arb_simple_path(), arb_scalar_update(), arb_env(), arb_value()), |(mu, sigma, env, v)| {
        let new = update_outputs(Engine::New, &mu, &sigma, &env, &v);
        let legacy = update_outputs(Engine::Legacy, &mu, &sigma, &env, &v);
        prop_assert_eq!(&new, &legacy, "`{} |= {}` on {}", mu, sigma, v);
        Ok(())
    })
}

/// Renaming variables bound inside a path does not change the update, and
/// the update agrees with the reference reading of the update table.
pub fn alpha_invariance(cases: u32) -> Check {
    let sigma = prop_oneof![arb_scalar_update(), arb_filter()];
    check(cases, 0xa1fa, (arb_path(), sigma, arb_env(), arb_value()), |(mu, sigma, env, v)| {
        let renamed = VARS.iter().fold(mu.clone(), |m, x| rename_bound(&m, x, &format!("{x}2")));
        let out = update_outputs(Engine::New, &mu, &sigma, &env, &v);
        prop_assert_eq!(&out, &update_outputs(Engine::New, &renamed, &sigma, &env, &v), "`{}` vs `{}`", mu, renamed);
        let f = close(Filter::complex(ComplexOp::Update, mu, sigma), &env);
        prop_assert_eq!(out, reference(&f, &v), "{}", f);
        Ok(())
    })
}
