use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::opalg::{Evaluator, ModeKind};
use crate::output::{ProtocolOutput, Side};
use crate::EvalError;

use super::SUPPORT_TOL;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Causality {
    Causal,
    Acausal,
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputDependencies {
    /// `(label, time_bin)` of every input with a nonzero coefficient.
    pub dependencies: BTreeSet<(String, u32)>,
    pub earliest_emission_bin: u32,
    pub latest_dependency_bin: u32,
    /// Earliest bin among signal inputs, if the output carries any.
    pub earliest_signal_bin: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DependencyReport {
    pub outputs: BTreeMap<String, OutputDependencies>,
    /// Largest wait between the first signal an output carries and its emission,
    /// over per-bin outputs (or transmitted outputs when there are none).
    pub mandatory_delay: u32,
    /// Per-bin outputs, ordered by emission, depend only on signal bins up to their own index.
    pub lower_triangular: bool,
    pub verdict: Causality,
}

fn scanned(side: Side) -> bool {
    side != Side::Aux
}

/// Dependency sets of every non-auxiliary port and the resulting verdict.
pub fn causality_report(out: &ProtocolOutput) -> Result<DependencyReport, EvalError> {
    let mut ev = Evaluator::new(&out.env);
    let mut outputs = BTreeMap::new();
    let mut verdict = Causality::Causal;
    for (name, port) in out.ports.iter().filter(|(_, p)| scanned(p.side)) {
        let mut deps = BTreeSet::new();
        for expr in [&port.state.zero, &port.state.perp] {
            let n = expr.eval_with(&mut ev)?;
            for (id, (c, d)) in &n.terms {
                if c.norm() > SUPPORT_TOL || d.norm() > SUPPORT_TOL {
                    deps.insert((id.label(), id.time_bin));
                }
            }
        }
        let latest = deps.iter().map(|(_, b)| *b).max().unwrap_or(0);
        if port.bin < latest {
            verdict = Causality::Acausal;
        }
        let signal_bins = out
            .inputs
            .iter()
            .filter(|id| id.kind == ModeKind::Signal && deps.contains(&(id.label(), id.time_bin)))
            .map(|id| id.time_bin);
        outputs.insert(
            name.clone(),
            OutputDependencies {
                earliest_signal_bin: signal_bins.min(),
                dependencies: deps,
                earliest_emission_bin: port.bin,
                latest_dependency_bin: latest,
            },
        );
    }

    let has_perbin = out.ports.values().any(|p| p.side == Side::Perbin);
    let delay_side = if has_perbin {
        Side::Perbin
    } else {
        Side::Transmitted
    };
    let mandatory_delay = out
        .ports
        .iter()
        .filter(|(_, p)| p.side == delay_side)
        .filter_map(|(n, p)| {
            outputs[n]
                .earliest_signal_bin
                .map(|b| p.bin.saturating_sub(b))
        })
        .max()
        .unwrap_or(0);

    let mut signal_bins: Vec<u32> = out
        .inputs
        .iter()
        .filter(|id| id.kind == ModeKind::Signal)
        .map(|id| id.time_bin)
        .collect();
    signal_bins.sort_unstable();
    signal_bins.dedup();
    let mut perbin: Vec<(&String, u32)> = out
        .ports
        .iter()
        .filter(|(_, p)| p.side == Side::Perbin)
        .map(|(n, p)| (n, p.bin))
        .collect();
    perbin.sort_by_key(|(n, b)| (*b, (*n).clone()));
    let lower_triangular = perbin.iter().enumerate().all(|(row, (name, _))| {
        outputs[*name].dependencies.iter().all(|(label, bin)| {
            let is_signal = out
                .inputs
                .iter()
                .any(|id| id.kind == ModeKind::Signal && id.label() == *label);
            !is_signal
                || signal_bins
                    .iter()
                    .position(|b| b == bin)
                    .is_some_and(|col| col <= row)
        })
    });

    Ok(DependencyReport {
        outputs,
        mandatory_delay,
        lower_triangular,
        verdict,
    })
}

/// Largest coefficient of any signal input from `prepared_bin` found in an
/// output emitted strictly earlier. Absent modes count as exactly zero.
pub fn signaling_test(out: &ProtocolOutput, prepared_bin: u32) -> Result<f64, EvalError> {
    let mut ev = Evaluator::new(&out.env);
    let mut worst: f64 = 0.0;
    for port in out
        .ports
        .values()
        .filter(|p| scanned(p.side) && p.bin < prepared_bin)
    {
        for expr in [&port.state.zero, &port.state.perp] {
            let n = expr.eval_with(&mut ev)?;
            for (id, (c, d)) in &n.terms {
                if id.kind == ModeKind::Signal && id.time_bin == prepared_bin {
                    worst = worst.max(c.norm()).max(d.norm());
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{evaluate_circuit, parse_circuit};
    use crate::opalg::{CoefExpr, ParamEnv};
    use crate::protocols::{
        build_delayed_telefilter, build_nodelay_telefilter, build_nodelay_telemirror,
    };

    fn half() -> CoefExpr {
        CoefExpr::ratio(1, 2)
    }

    fn zeros() -> (CoefExpr, CoefExpr) {
        (CoefExpr::zero(), CoefExpr::zero())
    }

    #[test]
    fn delayed_telefilter_waits_for_the_late_bin() {
        let out =
            build_delayed_telefilter(half(), -CoefExpr::pi() / CoefExpr::int(2), zeros()).unwrap();
        let r = causality_report(&out).unwrap();
        assert_eq!(r.verdict, Causality::Causal);
        assert_eq!(r.mandatory_delay, 1);
        for name in ["selected", "other"] {
            assert_eq!(r.outputs[name].earliest_emission_bin, 2, "{name}");
        }
    }

    #[test]
    fn nodelay_protocols_add_no_delay() {
        let tf = build_nodelay_telefilter(half(), zeros()).unwrap();
        let tm = build_nodelay_telemirror(
            half(),
            (
                -CoefExpr::pi() / CoefExpr::int(2),
                -CoefExpr::pi() / CoefExpr::int(2),
            ),
        )
        .unwrap();
        for out in [tf, tm] {
            let r = causality_report(&out).unwrap();
            assert_eq!(r.verdict, Causality::Causal);
            assert_eq!(r.mandatory_delay, 0);
            assert!(r.lower_triangular);
            assert_eq!(signaling_test(&out, 2).unwrap(), 0.0);
        }
    }

    #[test]
    fn early_displacement_is_acausal() {
        let text = include_str!("../../fixtures/acausal.tls");
        let out = evaluate_circuit(&parse_circuit(text).unwrap(), &ParamEnv::new()).unwrap();
        let r = causality_report(&out).unwrap();
        assert_eq!(r.verdict, Causality::Acausal);
        assert_eq!(r.outputs["out"].earliest_emission_bin, 0);
        assert_eq!(r.outputs["out"].latest_dependency_bin, 1);
        assert!(signaling_test(&out, 1).unwrap() > 0.5);
    }
}
