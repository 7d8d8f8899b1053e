//! Benchmark cases with closed-form expected outputs, timing, and CSV output.

use crate::compile::{CompileError, Compiler};
use crate::update::Engine;
use crate::value::{Value, ValueResult};
use std::time::Instant;

/// A benchmark program, run on the integer `n`.
#[derive(Copy, Clone, Debug)]
pub struct BenchCase {
    pub name: &'static str,
    pub program: &'static str,
    /// Run the program `n` times on `null` rather than once on `n`.
    pub repeat: bool,
    /// Outputs of one run, or `None` if the case is undefined for `n`.
    pub expected: fn(u64) -> Option<Vec<Value>>,
}

fn single(n: Option<u64>) -> Option<Vec<Value>> {
    n.and_then(|n| i64::try_from(n).ok()).map(|n| vec![Value::Int(n)])
}

fn pow2(n: u64) -> Option<u64> {
    1u64.checked_shl(u32::try_from(n).ok()?).filter(|p| *p <= i64::MAX as u64)
}

pub const CASES: &[BenchCase] = &[
    BenchCase { name: "empty", program: "empty", repeat: true, expected: |_| Some(Vec::new()) },
    BenchCase {
        name: "reverse",
        program: "[range(.)] | reverse | length",
        repeat: false,
        expected: |n| single(Some(n)),
    },
    BenchCase {
        name: "sort",
        program: "[range(.) | -.] | sort | length",
        repeat: false,
        expected: |n| single(Some(n)),
    },
    BenchCase {
        name: "add",
        program: "[range(.) | [.]] | add | length",
        repeat: false,
        expected: |n| single(Some(n)),
    },
    // x_i = i + x_{i-1}, seeded with [0] so that `.[-1]` always exists
    BenchCase {
        name: "reduce",
        program: "reduce range(.) as $x ([0]; . + [$x + .[-1]]) | length",
        repeat: false,
        expected: |n| single(n.checked_add(1)),
    },
    BenchCase {
        name: "tree-flatten",
        program: "nth(.; 0 | trees) | flatten | length",
        repeat: false,
        expected: |n| single(pow2(n)),
    },
    // increments all leaves; leaves are reached via `recurse` since `..` is not available
    BenchCase {
        name: "tree-update",
        program: "nth(.; 0 | trees) | recurse(if isarr then .[] else empty end) |= \
                  (if isarr then . else . + 1 end) | flatten | add",
        repeat: false,
        expected: |n| single(pow2(n)),
    },
];

/// Look up a case by name.
pub fn case(name: &str) -> Option<&'static BenchCase> {
    CASES.iter().find(|c| c.name == name)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub name: String,
    pub n: u64,
    pub engine: Engine,
    /// Median wall time of the repetitions, in milliseconds.
    pub ms: f64,
    /// Outputs of a run, space-separated.
    pub summary: String,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{case}: {source}")]
    Compile { case: String, source: CompileError },
    #[error("{case}-{n}: undefined for this n")]
    Undefined { case: String, n: u64 },
    #[error("{case}-{n} ({engine}): expected `{expected}`, got `{got}`")]
    Mismatch { case: String, n: u64, engine: Engine, expected: String, got: String },
    #[error("at least 3 repetitions are required, got {0}")]
    TooFewReps(usize),
}

fn render(xs: &[ValueResult]) -> String {
    let parts: Vec<String> = xs
        .iter()
        .map(|x| match x {
            Ok(v) => v.to_string(),
            Err(e) => format!("error({e})"),
        })
        .collect();
    parts.join(" ")
}

/// Run `case` on `n` `reps` times, checking the outputs of every run, and
/// report the median time. Compilation and input construction are not timed.
pub fn run_bench(case: &BenchCase, n: u64, engine: Engine, reps: usize) -> Result<BenchRecord, BenchError> {
    if reps < 3 {
        return Err(BenchError::TooFewReps(reps));
    }
    let expected = (case.expected)(n).ok_or_else(|| BenchError::Undefined { case: case.name.into(), n })?;
    let expected: Vec<ValueResult> = expected.into_iter().map(Ok).collect();
    let filter = Compiler::with_prelude()
        .engine(engine)
        .compile_text(case.program)
        .map_err(|source| BenchError::Compile { case: case.name.into(), source })?;
    let (runs, input) = if case.repeat {
        (n, Value::Null)
    } else {
        let n = i64::try_from(n).map_err(|_| BenchError::Undefined { case: case.name.into(), n })?;
        (1, Value::Int(n))
    };

    let mut times = Vec::with_capacity(reps);
    let mut outputs = Vec::new();
    for _ in 0..reps {
        let start = Instant::now();
        for _ in 0..runs {
            outputs = filter.run(input.clone()).collect();
        }
        times.push(start.elapsed().as_secs_f64() * 1e3);
        if runs > 0 && outputs != expected {
            return Err(BenchError::Mismatch {
                case: case.name.into(),
                n,
                engine,
                expected: render(&expected),
                got: render(&outputs),
            });
        }
    }
    times.sort_by(f64::total_cmp);
    Ok(BenchRecord {
        name: case.name.into(),
        n,
        engine,
        ms: times[times.len() / 2],
        summary: render(&outputs),
    })
}

/// Records as CSV with the header `name,n,engine,ms,summary`, in the given order.
pub fn emit_csv(records: &[BenchRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "n", "engine", "ms", "summary"]).expect("write to memory");
    for r in records {
        let row = [r.name.clone(), r.n.to_string(), r.engine.to_string(), format!("{:.3}", r.ms), r.summary.clone()];
        w.write_record(&row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV of UTF-8 fields")
}
