use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::opalg::{
    overlap_with_ev, quadrature_variance_with, Evaluator, ModeExpr, ModeKind, ParamEnv,
};
use crate::output::ProtocolOutput;
use crate::EvalError;

use super::{LIMIT_TOL, NOISE_THRESHOLD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ModeSelective,
    ModeDiscriminating,
    Neither,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ModeSelective => "mode_selective",
            Verdict::ModeDiscriminating => "mode_discriminating",
            Verdict::Neither => "neither",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PortSelectivity {
    pub target_overlap: Complex64,
    /// Weight of signal superpositions orthogonal to the target.
    pub orthogonal_leakage: f64,
    /// Largest of the X and P variances, minus the vacuum value.
    pub noise_variance_excess: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectivityReport {
    /// Port carrying the target cleanly, if any.
    pub clean_port: Option<String>,
    pub target_overlap: Complex64,
    /// Largest orthogonal leakage over transmitted ports.
    pub orthogonal_leakage: f64,
    pub ports: BTreeMap<String, PortSelectivity>,
    pub verdict: Verdict,
}

/// Classifies the transmitted ports against `target` at the environment's limit scale.
pub fn selectivity_report(
    out: &ProtocolOutput,
    target: &ModeExpr,
    env: &ParamEnv,
) -> Result<SelectivityReport, EvalError> {
    let env = out.env.overlay(env);
    let mut ev = Evaluator::new(&env);
    let t = target.eval_with(&mut ev)?;
    let mut ports = BTreeMap::new();
    for (name, p) in out.transmitted() {
        let a = &p.state.zero;
        let ov = overlap_with_ev(&mut ev, a, target)?;
        let n = a.eval_with(&mut ev)?;
        let leak: f64 = n
            .terms
            .iter()
            .filter(|(id, _)| id.kind == ModeKind::Signal)
            .map(|(id, (c, d))| {
                let (tc, td) = t.terms.get(id).copied().unwrap_or_default();
                (c - ov * tc).norm_sqr() + (d - ov * td).norm_sqr()
            })
            .sum();
        let vx = quadrature_variance_with(&mut ev, a, 0.0)?;
        let vp = quadrature_variance_with(&mut ev, a, std::f64::consts::FRAC_PI_2)?;
        ports.insert(
            name.clone(),
            PortSelectivity {
                target_overlap: ov,
                orthogonal_leakage: leak.sqrt(),
                noise_variance_excess: vx.max(vp) - 1.0,
            },
        );
    }
    let clean = |p: &PortSelectivity| {
        p.target_overlap.norm() >= 1.0 - LIMIT_TOL && p.noise_variance_excess <= NOISE_THRESHOLD
    };
    let clean_port = ports.iter().find(|(_, p)| clean(p)).map(|(n, _)| n.clone());
    let leakage = ports
        .values()
        .map(|p| p.orthogonal_leakage)
        .fold(0.0, f64::max);
    let verdict = match &clean_port {
        None => Verdict::Neither,
        Some(_) if leakage <= LIMIT_TOL => Verdict::ModeSelective,
        Some(c) => {
            let noisy = ports
                .iter()
                .filter(|(n, p)| *n != c && p.orthogonal_leakage > LIMIT_TOL)
                .all(|(_, p)| p.noise_variance_excess > NOISE_THRESHOLD);
            if noisy && ports[c].orthogonal_leakage <= LIMIT_TOL {
                Verdict::ModeDiscriminating
            } else {
                Verdict::Neither
            }
        }
    };
    Ok(SelectivityReport {
        target_overlap: clean_port
            .as_ref()
            .map(|c| ports[c].target_overlap)
            .unwrap_or_default(),
        clean_port,
        orthogonal_leakage: leakage,
        ports,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::CoefExpr;
    use crate::protocols::{
        build_delayed_telefilter, build_nodelay_independent, build_nodelay_telefilter,
    };

    fn classify(out: &ProtocolOutput, target: &str) -> SelectivityReport {
        selectivity_report(out, &out.targets[target], &ParamEnv::new()).unwrap()
    }

    fn zeros() -> (CoefExpr, CoefExpr) {
        (CoefExpr::zero(), CoefExpr::zero())
    }

    #[test]
    fn delayed_telefilter_is_selective() {
        let out = build_delayed_telefilter(
            CoefExpr::ratio(1, 2),
            -CoefExpr::pi() / CoefExpr::int(2),
            zeros(),
        )
        .unwrap();
        let r = classify(&out, "sel_mode");
        assert_eq!(r.verdict, Verdict::ModeSelective);
        assert_eq!(r.clean_port.as_deref(), Some("selected"));
        assert!((r.target_overlap - 1.0).norm() < 1e-8);
    }

    #[test]
    fn nodelay_telefilter_discriminates() {
        let out = build_nodelay_telefilter(CoefExpr::ratio(1, 2), zeros()).unwrap();
        let r = classify(&out, "sel_mode");
        assert_eq!(r.verdict, Verdict::ModeDiscriminating);
        assert!((r.ports["other"].noise_variance_excess - 2.0).abs() < 1e-8);
    }

    #[test]
    fn independent_teleporters_are_neither() {
        let out = build_nodelay_independent().unwrap();
        let r = classify(&out, "sym_mode");
        assert_eq!(r.verdict, Verdict::Neither);
        assert_eq!(r.clean_port.as_deref(), Some("sym"));
        assert!((r.ports["anti"].orthogonal_leakage - 1.0).abs() < 1e-8);
    }
}
