//! Benchmark fixtures shared by the criterion harnesses.

use telesim_core::dsl::Circuit;
use telesim_core::protocols::{registry, Overrides};
use telesim_core::{CoefExpr, ParamValue};

/// Every registered builder at its default options and a mode count of `n`.
pub fn default_circuits(n: usize) -> Vec<(&'static str, Circuit)> {
    registry()
        .iter()
        .map(|p| {
            let opts = p.opts(&[], n).expect("default options");
            (
                p.name,
                p.circuit(&opts, Overrides::new()).expect("default circuit"),
            )
        })
        .collect()
}

/// Same as [`default_circuits`] with every infinite parameter pinned to `value`.
pub fn finite_circuits(n: usize, value: f64) -> Vec<(&'static str, Circuit)> {
    registry()
        .iter()
        .map(|p| {
            let opts = p.opts(&[], n).expect("default options");
            let mut ov = Overrides::new();
            for (k, v) in p.params() {
                if matches!(v, ParamValue::Infinity) {
                    ov = ov.set(&k, CoefExpr::real(value));
                }
            }
            (p.name, p.circuit(&opts, ov).expect("finite circuit"))
        })
        .collect()
}

/// N-mode delayed telefilter circuits for scaling runs.
pub fn nmode_circuit(n: usize) -> Circuit {
    let p = telesim_core::protocols::lookup("nmode_delayed_telefilter").expect("registered");
    p.circuit(&p.opts(&[], n).expect("mode count"), Overrides::new())
        .expect("circuit")
}
