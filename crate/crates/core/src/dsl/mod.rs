//! Text format for circuits: parsing, validation, evaluation.

pub mod ast;
pub mod eval;
pub mod parser;
pub mod validate;

pub use ast::{serialize, Circuit, ModeTerm, Pos, Statement, Stmt};
pub use eval::{circuit_env, evaluate_circuit, DslError, EXACT_TOL};
pub use parser::{parse_circuit, parse_circuit_bytes, parse_expr, parse_syntax, ParseError};
pub use validate::{expand, validate};
