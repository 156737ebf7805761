//! Heisenberg-picture simulation of continuous-variable teleportation circuits.

pub mod dsl;
pub mod elements;
pub mod hp;
pub mod opalg;
pub mod output;
pub mod protocols;
pub mod report;
pub mod verify;

pub use opalg::*;

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("parameter `{0}` must be real")]
    ComplexParameter(String),
    #[error("parameter `{0}` is defined in terms of itself")]
    Cycle(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error in {0}")]
    Domain(String),
    #[error("malformed numeric literal `{0}`")]
    BadLiteral(String),
    #[error("target is not a proper mode (norm {0})")]
    NotProperMode(f64),
}
