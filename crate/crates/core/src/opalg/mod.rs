//! Bosonic mode-operator algebra with symbolic coefficients.

pub mod coef;
pub mod env;
pub mod mode;

pub use coef::{CoefExpr, CoefNode, Evaluator, Func};
pub use env::{ParamEnv, ParamValue, DEFAULT_LIMIT_SCALE};
pub use mode::{
    commutator, commutator_with, dagger, input_mode, is_proper_mode, lin_comb, overlap_with,
    overlap_with_ev, quadrature_variance, quadrature_variance_with, Component, HpMode, ModeExpr,
    ModeId, ModeKind, NumMode, PROPER_MODE_TOL,
};
