use clap::Parser;
use jqlet::{decode_values, parse_defs, parse_program, Compiler, Engine, Filter, Value};
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_COMPILE: u8 = 2;
const EXIT_DECODE: u8 = 3;
const EXIT_RUNTIME: u8 = 5;

/// Run a filter on every input value and print its outputs, one per line.
#[derive(Parser)]
#[command(name = "jqlet", version)]
struct Cli {
    /// Read the filter from FILE; all positional arguments are then input files
    #[arg(short = 'f', long = "from-file", value_name = "FILE")]
    from_file: Option<PathBuf>,
    /// Run the filter once with `null` as input instead of reading inputs
    #[arg(short = 'n', long = "null-input")]
    null_input: bool,
    /// Update engine used for `|=`
    #[arg(long, value_name = "ENGINE", default_value = "new")]
    engine: Engine,
    /// Load additional definitions from FILE
    #[arg(long, value_name = "FILE")]
    defs: Option<PathBuf>,
    /// Do not load the standard definitions
    #[arg(long)]
    no_prelude: bool,
    /// Print the number of elements of each output instead of the output
    #[arg(long)]
    length: bool,
    /// FILTER followed by input files (only input files with `-f`)
    #[arg(value_name = "FILTER | FILE")]
    args: Vec<String>,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("jqlet: {msg}");
    ExitCode::from(code)
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut args = cli.args.into_iter();
    let program = match &cli.from_file {
        Some(path) => match read(path) {
            Ok(text) => text,
            Err(e) => return fail(EXIT_COMPILE, e),
        },
        None => match args.next() {
            Some(text) => text,
            None => return fail(EXIT_COMPILE, "no filter given"),
        },
    };
    let files: Vec<PathBuf> = args.map(PathBuf::from).collect();

    let mut compiler = if cli.no_prelude { Compiler::new() } else { Compiler::with_prelude() }.engine(cli.engine);
    if let Some(path) = &cli.defs {
        let defs = read(path).and_then(|text| parse_defs(&text).map_err(|e| format!("{}: {e}", path.display())));
        match defs.map(|defs| compiler.add_defs(defs).map_err(|e| e.to_string())) {
            Ok(Ok(())) => {}
            Ok(Err(e)) | Err(e) => return fail(EXIT_COMPILE, e),
        }
    }
    let (defs, mut main) = match parse_program(&program) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_COMPILE, format_args!("syntax error at {e}")),
    };
    if cli.length {
        let length = jqlet::parse_filter("if . == null then 0 else reduce .[] as $x (0; . + 1) end").expect("length parses");
        main = Filter::pipe(main, length);
    }
    if let Err(e) = compiler.add_defs(defs) {
        return fail(EXIT_COMPILE, e);
    }
    let filter = match compiler.compile(&main) {
        Ok(f) => f,
        Err(e) => return fail(EXIT_COMPILE, e),
    };
    for w in filter.warnings() {
        eprintln!("jqlet: warning: {w}");
    }

    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let mut failed = false;
    let mut process = |v: Value| -> io::Result<()> {
        for r in filter.run(v) {
            match r {
                Ok(x) => writeln!(out, "{x}")?,
                Err(e) => {
                    out.flush()?;
                    eprintln!("jqlet: error: {e}");
                    failed = true;
                }
            }
        }
        Ok(())
    };

    let result = if cli.null_input {
        process(Value::Null).map_err(|e| (1, e.to_string()))
    } else {
        let texts: Vec<Result<String, String>> = if files.is_empty() {
            let mut s = String::new();
            vec![io::stdin().read_to_string(&mut s).map(|_| s).map_err(|e| format!("cannot read input: {e}"))]
        } else {
            files.iter().map(read).collect()
        };
        texts.into_iter().try_for_each(|text| {
            let text = text.map_err(|e| (EXIT_DECODE, e))?;
            for v in decode_values(&text) {
                let v = v.map_err(|e| (EXIT_DECODE, format!("invalid input at {e}")))?;
                process(v).map_err(|e| (1, e.to_string()))?;
            }
            Ok(())
        })
    };
    if let Err((code, msg)) = result {
        let _ = out.flush();
        return fail(code, msg);
    }
    if let Err(e) = out.flush() {
        return fail(1, e);
    }
    if failed {
        ExitCode::from(EXIT_RUNTIME)
    } else {
        ExitCode::SUCCESS
    }
}
