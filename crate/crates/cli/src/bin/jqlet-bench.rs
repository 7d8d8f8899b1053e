use clap::{Parser, ValueEnum};
use jqlet::bench::{self, emit_csv, run_bench, BenchError};
use jqlet::Engine;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Copy, Clone, ValueEnum)]
enum Engines {
    New,
    Legacy,
    Both,
}

impl Engines {
    fn list(self) -> &'static [Engine] {
        match self {
            Self::New => &[Engine::New],
            Self::Legacy => &[Engine::Legacy],
            Self::Both => &[Engine::New, Engine::Legacy],
        }
    }
}

/// Time the benchmark cases and print the results as CSV.
#[derive(Parser)]
#[command(name = "jqlet-bench", version)]
struct Cli {
    /// Comma-separated case names (default: all)
    #[arg(long, value_delimiter = ',')]
    cases: Vec<String>,
    /// Comma-separated values of n
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,10")]
    n: Vec<u64>,
    #[arg(long, value_enum, default_value = "new")]
    engine: Engines,
    /// Repetitions per measurement; the median is reported
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Write CSV to FILE instead of standard output
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cases: Vec<_> = if cli.cases.is_empty() {
        bench::CASES.iter().collect()
    } else {
        let mut cases = Vec::new();
        for name in &cli.cases {
            match bench::case(name) {
                Some(c) => cases.push(c),
                None => {
                    eprintln!("jqlet-bench: unknown case `{name}`");
                    return ExitCode::from(2);
                }
            }
        }
        cases
    };

    let mut records = Vec::new();
    for case in cases {
        for &n in &cli.n {
            for &engine in cli.engine.list() {
                match run_bench(case, n, engine, cli.reps) {
                    Ok(r) => records.push(r),
                    Err(e @ BenchError::Undefined { .. }) => eprintln!("jqlet-bench: skipping {e}"),
                    Err(e) => {
                        eprintln!("jqlet-bench: {e}");
                        return ExitCode::FAILURE;
                    }
                }
            }
        }
    }

    let csv = emit_csv(&records);
    match cli.csv {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, csv) {
                eprintln!("jqlet-bench: cannot write {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        }
        None => print!("{csv}"),
    }
    ExitCode::SUCCESS
}
