//! Independent checks on evaluated circuits: commutator suites, limit
//! extraction, closed-form expectations, a covariance-matrix oracle, causality
//! and selectivity classification.

mod causality;
mod oracle;
mod selectivity;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::dsl::EXACT_TOL;
use crate::opalg::mode::commutator_hp;
use crate::opalg::{Evaluator, HpMode, ModeExpr, NumMode, ParamEnv};
use crate::output::ProtocolOutput;
use crate::EvalError;

pub use causality::{
    causality_report, signaling_test, Causality, DependencyReport, OutputDependencies,
};
pub use oracle::{covariance_oracle, MomentRecord, OracleError, QuadVariances};
pub use selectivity::{selectivity_report, PortSelectivity, SelectivityReport, Verdict};

/// Default tolerance for limit expectations at the default limit scale.
pub const LIMIT_TOL: f64 = 1e-8;
/// Variance excess above which a transmitted port counts as noisy.
pub const NOISE_THRESHOLD: f64 = 0.5;
/// Coefficients at or below this magnitude are treated as absent.
pub const SUPPORT_TOL: f64 = 1e-12;

fn dagger_hp(ev: &mut Evaluator<'_>, a: &HpMode) -> HpMode {
    let h = ev.hp();
    a.iter()
        .map(|(k, (c, d))| (k.clone(), (h.conj(d), h.conj(c))))
        .collect()
}

fn max_abs_hp(ev: &mut Evaluator<'_>, a: &HpMode) -> f64 {
    let h = ev.hp();
    a.values()
        .map(|(c, d)| h.abs_f64(c).max(h.abs_f64(d)))
        .fold(0.0, f64::max)
}

fn diff_hp(ev: &mut Evaluator<'_>, a: &ModeExpr, b: &ModeExpr) -> Result<f64, EvalError> {
    let d = a.minus(b).eval_hp(ev)?;
    Ok(max_abs_hp(ev, &d))
}

#[derive(Clone, Debug, Serialize)]
pub struct BogoliubovReport {
    pub modes: usize,
    /// Largest deviation of any `[A,B]` or `[A,B†]` from its canonical value.
    pub max_deviation: f64,
    /// The pair attaining `max_deviation`, as `(i, j, "[A,B]" | "[A,B†]")`.
    pub worst: Option<(String, String, String)>,
    pub tol: f64,
    pub pass: bool,
}

/// Checks that `outputs` obey canonical commutation relations.
pub fn check_bogoliubov(
    outputs: &[(String, ModeExpr)],
    env: &ParamEnv,
    tol: f64,
) -> Result<BogoliubovReport, EvalError> {
    let mut ev = Evaluator::new(env);
    let mut hp = Vec::new();
    for (_, e) in outputs {
        let a = e.eval_hp(&mut ev)?;
        let ad = dagger_hp(&mut ev, &a);
        hp.push((a, ad));
    }
    let mut max_dev: f64 = 0.0;
    let mut worst = None;
    for i in 0..hp.len() {
        for j in i..hp.len() {
            let cd = commutator_hp(&mut ev, &hp[i].0, &hp[j].1);
            let expect = if i == j { 1.0 } else { 0.0 };
            let h = ev.hp();
            let dev = h.abs_f64(&h.sub(&cd, &h.from_f64(expect)));
            let cc = commutator_hp(&mut ev, &hp[i].0, &hp[j].0);
            let dev2 = ev.hp().abs_f64(&cc);
            for (d, kind) in [(dev, "[A,B†]"), (dev2, "[A,B]")] {
                if d > max_dev || worst.is_none() {
                    max_dev = max_dev.max(d);
                    worst = Some((outputs[i].0.clone(), outputs[j].0.clone(), kind.to_string()));
                }
            }
        }
    }
    Ok(BogoliubovReport {
        modes: outputs.len(),
        max_deviation: max_dev,
        worst,
        tol,
        pass: max_dev <= tol,
    })
}

#[derive(Clone, Debug)]
pub struct LimitResult {
    pub at_l: NumMode,
    pub at_2l: NumMode,
    pub scale: f64,
    pub max_difference: f64,
    /// Labels whose coefficients grow between the two scales.
    pub divergent: Vec<String>,
    pub converged: bool,
    /// Coefficients at `2L`, the better estimate of the limit.
    pub limit: NumMode,
}

/// Evaluates `expr` with `params` sent to `L` and `2L` and compares the results.
pub fn limit_coefficients(
    expr: &ModeExpr,
    params: &[&str],
    env: &ParamEnv,
    tol: f64,
) -> Result<LimitResult, EvalError> {
    let l = env.limit_scale();
    let mut e1 = env.clone();
    for p in params {
        e1.set_infinity(p);
    }
    let e2 = e1.clone().with_limit_scale(2.0 * l);
    let at_l = expr.eval(&e1)?;
    let at_2l = expr.eval(&e2)?;
    let max_difference = at_l.distance(&at_2l);
    let mut divergent = Vec::new();
    for (id, (c2, d2)) in &at_2l.terms {
        let (c1, d1) = at_l.terms.get(id).copied().unwrap_or_default();
        let grow = |a: Complex64, b: Complex64| b.norm() > 2.0 * a.norm() + 1.0;
        if grow(c1, *c2) || grow(d1, *d2) {
            divergent.push(id.label());
        }
    }
    Ok(LimitResult {
        converged: divergent.is_empty() && max_difference <= tol,
        limit: at_2l.clone(),
        at_l,
        at_2l,
        scale: l,
        max_difference,
        divergent,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpectationCheck {
    /// `port` or `port.perp`.
    pub key: String,
    pub limit: bool,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Residuals of every closed-form expectation declared by the circuit.
///
/// Exact expectations are compared at working precision; limit expectations at
/// the environment's limit scale against `limit_tol`.
pub fn check_expectations(
    out: &ProtocolOutput,
    limit_tol: f64,
) -> Result<Vec<ExpectationCheck>, EvalError> {
    let mut ev = Evaluator::new(&out.env);
    let mut res = Vec::new();
    for (limit, map, tol) in [
        (false, &out.expected, EXACT_TOL),
        (true, &out.expected_limit, limit_tol),
    ] {
        for (key, want) in map {
            let got = port_component(out, key).unwrap_or_default();
            let residual = diff_hp(&mut ev, &got, want)?;
            res.push(ExpectationCheck {
                key: key.clone(),
                limit,
                residual,
                tol,
                pass: residual <= tol,
            });
        }
    }
    Ok(res)
}

/// The expression behind `port` or `port.perp`.
pub fn port_component(out: &ProtocolOutput, key: &str) -> Option<ModeExpr> {
    match key.strip_suffix(".perp") {
        Some(p) => out.perp(p).cloned(),
        None => out.zero(key).cloned(),
    }
}

/// Largest coefficient of `a − b` at working precision.
pub fn residual(a: &ModeExpr, b: &ModeExpr, env: &ParamEnv) -> Result<f64, EvalError> {
    diff_hp(&mut Evaluator::new(env), a, b)
}

/// Numeric coefficient tables of every port component, keyed like expectations.
pub fn port_tables(out: &ProtocolOutput) -> Result<BTreeMap<String, NumMode>, EvalError> {
    let mut ev = Evaluator::new(&out.env);
    let mut res = BTreeMap::new();
    for (name, p) in &out.ports {
        res.insert(name.clone(), p.state.zero.eval_with(&mut ev)?);
        res.insert(format!("{name}.perp"), p.state.perp.eval_with(&mut ev)?);
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{CoefExpr, ModeId, ModeKind};
    use crate::protocols::{build_atemporal_telefilter, GainMode};

    fn j() -> ModeExpr {
        ModeExpr::input(&ModeId::new("j", ModeKind::Signal, "in", 0))
    }

    #[test]
    fn non_canonical_set_fails() {
        let env = ParamEnv::new();
        let set = vec![
            ("a".to_string(), j()),
            ("b".to_string(), j().scale(&CoefExpr::int(2))),
        ];
        let r = check_bogoliubov(&set, &env, 1e-10).unwrap();
        assert!(!r.pass);
        assert!((r.max_deviation - 3.0).abs() < 1e-12, "{}", r.max_deviation);
    }

    #[test]
    fn telefilter_output_converges_to_input() {
        let out = build_atemporal_telefilter(GainMode::Unity).unwrap();
        let r = limit_coefficients(out.zero("out").unwrap(), &["s"], &out.env, LIMIT_TOL).unwrap();
        assert!(r.converged, "{r:?}");
        assert!((r.limit.c("j") - 1.0).norm() < 1e-15);
        assert!(r.limit.max_abs_excluding(&["j"]) < 1e-8);
    }

    #[test]
    fn growing_coefficient_is_divergent() {
        let s = CoefExpr::param("s");
        let e = j().scale(&s.cosh());
        let r = limit_coefficients(&e, &["s"], &ParamEnv::new(), LIMIT_TOL).unwrap();
        assert!(!r.converged);
        assert_eq!(r.divergent, vec!["j".to_string()]);
    }
}
