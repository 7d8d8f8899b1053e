//! An interpreter for a small subset of the jq language: integers, booleans,
//! `null`, and arrays, with lazy streams of results and errors.
//!
//! ```
//! use jqlet::{Compiler, Value};
//!
//! let filter = Compiler::with_prelude().compile_text(".[] |= . + 1").unwrap();
//! let input: Value = [1, 2, 3].into_iter().map(Value::Int).collect();
//! let out: Vec<String> = filter.run(input).map(|r| r.unwrap().to_string()).collect();
//! assert_eq!(out, ["[2,3,4]"]);
//! ```

pub mod bench;
pub mod compile;
pub mod eval;
pub mod prelude;
pub mod syntax;
pub mod text;
pub mod update;
pub mod value;

pub use compile::{inline_calls, substitute, CompileError, Compiled, Compiler, FreshNames, ResolveError, Substitution, Term};
pub use eval::{eval, run, Ctx};
pub use syntax::{parse_defs, parse_filter, parse_program, Definition, Filter, ParseError};
pub use text::{decode_value, decode_values, DecodeError};
pub use update::{collect_paths, eval_update, eval_update_legacy, Engine, Path, UpdateClosure};
pub use value::{cartesian, elems, index, stream_to_array, CartesianOp, Error, Stream, Value, ValueResult};
