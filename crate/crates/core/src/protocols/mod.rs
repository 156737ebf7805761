//! Circuit builders for the telefilter and telemirror family, and the
//! registry that exposes them to the text format and the command line.
//!
//! Every builder returns a [`Circuit`]; its parameters are declared with
//! defaults so that the same circuit can be evaluated anywhere in parameter
//! space. The `build_*` functions evaluate the circuit symbolically.

mod atemporal;
mod builder;
mod delayed;
mod nmode;
mod nodelay;

use std::collections::BTreeMap;

use crate::dsl::{evaluate_circuit, Circuit, DslError, Stmt};
use crate::opalg::{CoefExpr, CoefNode, ParamEnv, ParamValue};
use crate::output::ProtocolOutput;

use builder::B;

/// An enumerated builder option and its admissible values; the first is the default.
#[derive(Clone, Copy, Debug)]
pub struct OptionSpec {
    pub name: &'static str,
    pub choices: &'static [&'static str],
}

#[derive(Clone, Copy)]
pub struct ProtocolInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub options: &'static [OptionSpec],
    /// Whether the builder takes a mode count `n`.
    pub counted: bool,
    build: fn(&Opts, &mut Overrides) -> Circuit,
}

impl std::fmt::Debug for ProtocolInfo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProtocolInfo")
            .field("name", &self.name)
            .finish()
    }
}

/// Resolved structural options.
#[derive(Clone, Debug)]
pub struct Opts {
    choices: BTreeMap<&'static str, &'static str>,
    pub n: usize,
}

impl Opts {
    fn get(&self, name: &str) -> &'static str {
        self.choices.get(name).copied().unwrap_or("")
    }
}

/// Parameter values supplied by the caller in place of the builder defaults.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    values: BTreeMap<String, ParamValue>,
}

impl Overrides {
    pub fn new() -> Self {
        Overrides::default()
    }

    pub fn set(mut self, name: &str, value: CoefExpr) -> Self {
        self.values
            .insert(name.to_string(), ParamValue::Value(value));
        self
    }

    pub fn set_value(mut self, name: &str, value: ParamValue) -> Self {
        self.values.insert(name.to_string(), value);
        self
    }

    fn param(&mut self, b: &mut B, name: &str, default: ParamValue) {
        let v = self.values.remove(name).unwrap_or(default);
        b.param(name, v);
    }

    fn value(&mut self, b: &mut B, name: &str, default: &str) {
        self.param(b, name, ParamValue::Value(builder::ex(default)));
    }

    fn infinite(&mut self, b: &mut B, name: &str) {
        self.param(b, name, ParamValue::Infinity);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GainMode {
    Unity,
    Tanh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MirrorGain {
    Unity,
    Matched,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reflect {
    Chain,
    Single,
}

const GAIN: OptionSpec = OptionSpec {
    name: "gain",
    choices: &["unity", "tanh"],
};

static REGISTRY: &[ProtocolInfo] = &[
    ProtocolInfo {
        name: "atemporal_telefilter",
        summary: "single-mode telefilter with dual homodyne feed-forward",
        options: &[GAIN],
        counted: false,
        build: atemporal::telefilter,
    },
    ProtocolInfo {
        name: "atemporal_telemirror",
        summary: "all-optical single-mode telemirror with reflected-mode recovery",
        options: &[
            OptionSpec {
                name: "reflect",
                choices: &["chain", "single"],
            },
            OptionSpec {
                name: "gain",
                choices: &["unity", "matched"],
            },
        ],
        counted: false,
        build: atemporal::telemirror,
    },
    ProtocolInfo {
        name: "delayed_telefilter",
        summary: "two-bin telefilter with combined measurement after the late bin",
        options: &[GAIN],
        counted: false,
        build: delayed::telefilter,
    },
    ProtocolInfo {
        name: "delayed_telemirror",
        summary: "two-bin all-optical telemirror with reflected-mode recovery",
        options: &[],
        counted: false,
        build: delayed::telemirror,
    },
    ProtocolInfo {
        name: "nmode_delayed_telefilter",
        summary: "n-bin telefilter with cascade distribution and combined measurement",
        options: &[],
        counted: true,
        build: nmode::delayed,
    },
    ProtocolInfo {
        name: "nmode_nodelay_telefilter",
        summary: "n-bin telefilter with per-bin feed-forward",
        options: &[],
        counted: true,
        build: nmode::nodelay,
    },
    ProtocolInfo {
        name: "nodelay_independent",
        summary: "two independent single-mode teleporters, one per bin",
        options: &[],
        counted: false,
        build: nodelay::independent,
    },
    ProtocolInfo {
        name: "nodelay_telefilter",
        summary: "two-bin telefilter with per-bin feed-forward",
        options: &[],
        counted: false,
        build: nodelay::telefilter,
    },
    ProtocolInfo {
        name: "nodelay_telemirror",
        summary: "two-bin all-optical telemirror with per-bin channels",
        options: &[],
        counted: false,
        build: nodelay::telemirror,
    },
];

pub fn registry() -> &'static [ProtocolInfo] {
    REGISTRY
}

pub fn lookup(name: &str) -> Option<&'static ProtocolInfo> {
    REGISTRY.iter().find(|p| p.name == name)
}

pub const DEFAULT_MODE_COUNT: usize = 3;

impl ProtocolInfo {
    pub fn default_opts(&self) -> Opts {
        Opts {
            choices: self
                .options
                .iter()
                .map(|o| (o.name, o.choices[0]))
                .collect(),
            n: DEFAULT_MODE_COUNT,
        }
    }

    /// Resolves options by name, e.g. `[("gain", "tanh")]`.
    pub fn opts(&self, choices: &[(&str, &str)], n: usize) -> Result<Opts, String> {
        let mut o = self.default_opts();
        for (k, v) in choices {
            let spec = self
                .options
                .iter()
                .find(|s| s.name == *k)
                .ok_or_else(|| format!("protocol `{}` has no option `{k}`", self.name))?;
            let c = spec.choices.iter().find(|c| **c == *v).ok_or_else(|| {
                format!(
                    "option `{k}` of `{}` must be one of {}",
                    self.name,
                    spec.choices.join(", ")
                )
            })?;
            o.choices.insert(spec.name, c);
        }
        if self.counted {
            if n < 2 {
                return Err(format!("protocol `{}` needs n >= 2", self.name));
            }
            o.n = n;
        }
        Ok(o)
    }

    pub fn circuit(&self, opts: &Opts, overrides: Overrides) -> Result<Circuit, String> {
        let mut ov = overrides;
        let c = (self.build)(opts, &mut ov);
        if let Some(k) = ov.values.keys().next() {
            return Err(format!("protocol `{}` has no parameter `{k}`", self.name));
        }
        Ok(c)
    }

    /// Every combination of option choices, defaults first.
    pub fn option_combinations(&self) -> Vec<Vec<(&'static str, &'static str)>> {
        let mut combos: Vec<Vec<(&'static str, &'static str)>> = vec![vec![]];
        for o in self.options {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    o.choices.iter().map(move |v| {
                        let mut c = c.clone();
                        c.push((o.name, *v));
                        c
                    })
                })
                .collect();
        }
        combos
    }

    /// Parameter names and default values of the default circuit.
    pub fn params(&self) -> Vec<(String, ParamValue)> {
        (self.build)(&self.default_opts(), &mut Overrides::new())
            .iter()
            .filter_map(|s| match s {
                Stmt::Param { name, value } => Some((name.clone(), value.clone())),
                _ => None,
            })
            .collect()
    }
}

/// Builds the circuit for `protocol NAME(args)`.
///
/// Option arguments take a bare word (`gain=tanh`), the mode count takes an
/// integer (`n=4`), and every other argument replaces a parameter default.
pub fn expand_invocation(name: &str, args: &[(String, CoefExpr)]) -> Result<Circuit, String> {
    let info = lookup(name).ok_or_else(|| format!("unknown protocol `{name}`"))?;
    let mut choices = Vec::new();
    let mut n = DEFAULT_MODE_COUNT;
    let mut ov = Overrides::new();
    for (k, v) in args {
        if info.options.iter().any(|o| o.name == k) {
            match v.node() {
                CoefNode::Param(word) => choices.push((k.as_str(), word.as_str())),
                _ => return Err(format!("option `{k}` takes a bare word")),
            }
        } else if info.counted && k == "n" {
            n = match v.node() {
                CoefNode::Num(s) => s
                    .parse::<usize>()
                    .map_err(|_| "n must be an integer".to_string())?,
                _ => return Err("n must be an integer".to_string()),
            };
            if n > 64 {
                return Err("n must be at most 64".to_string());
            }
        } else {
            ov = ov.set(k, v.clone());
        }
    }
    let opts = info.opts(&choices, n)?;
    info.circuit(&opts, ov)
}

fn build(
    name: &str,
    choices: &[(&str, &str)],
    n: usize,
    ov: Overrides,
) -> Result<ProtocolOutput, DslError> {
    let info = lookup(name).expect("registered protocol");
    let opts = info
        .opts(choices, n)
        .map_err(|message| DslError::Precondition {
            pos: Default::default(),
            message,
        })?;
    let c = info
        .circuit(&opts, ov)
        .map_err(|message| DslError::Precondition {
            pos: Default::default(),
            message,
        })?;
    evaluate_circuit(&c, &ParamEnv::new())
}

pub fn build_atemporal_telefilter(gain: GainMode) -> Result<ProtocolOutput, DslError> {
    let g = match gain {
        GainMode::Unity => "unity",
        GainMode::Tanh => "tanh",
    };
    build("atemporal_telefilter", &[("gain", g)], 0, Overrides::new())
}

pub fn build_atemporal_telemirror(
    reflect: Reflect,
    gain: MirrorGain,
) -> Result<ProtocolOutput, DslError> {
    let r = match reflect {
        Reflect::Chain => "chain",
        Reflect::Single => "single",
    };
    let g = match gain {
        MirrorGain::Unity => "unity",
        MirrorGain::Matched => "matched",
    };
    build(
        "atemporal_telemirror",
        &[("reflect", r), ("gain", g)],
        0,
        Overrides::new(),
    )
}

pub fn build_delayed_telefilter(
    alpha: CoefExpr,
    phi: CoefExpr,
    quad_phases: (CoefExpr, CoefExpr),
) -> Result<ProtocolOutput, DslError> {
    let ov = Overrides::new()
        .set("alpha", alpha)
        .set("phi", phi)
        .set("phi1", quad_phases.0)
        .set("phi2", quad_phases.1);
    build("delayed_telefilter", &[], 0, ov)
}

pub fn build_delayed_telemirror(
    alpha: CoefExpr,
    phi: CoefExpr,
) -> Result<ProtocolOutput, DslError> {
    build(
        "delayed_telemirror",
        &[],
        0,
        Overrides::new().set("alpha", alpha).set("phi", phi),
    )
}

pub fn build_nodelay_independent() -> Result<ProtocolOutput, DslError> {
    build("nodelay_independent", &[], 0, Overrides::new())
}

pub fn build_nodelay_telefilter(
    alpha: CoefExpr,
    quad_phases: (CoefExpr, CoefExpr),
) -> Result<ProtocolOutput, DslError> {
    let ov = Overrides::new()
        .set("alpha", alpha)
        .set("phi1", quad_phases.0)
        .set("phi2", quad_phases.1);
    build("nodelay_telefilter", &[], 0, ov)
}

pub fn build_nodelay_telemirror(
    alpha: CoefExpr,
    theta: (CoefExpr, CoefExpr),
) -> Result<ProtocolOutput, DslError> {
    let ov = Overrides::new()
        .set("alpha", alpha)
        .set("theta_minus", theta.0)
        .set("theta_plus", theta.1);
    build("nodelay_telemirror", &[], 0, ov)
}

fn list_overrides(mut ov: Overrides, prefix: &str, values: &[CoefExpr]) -> Overrides {
    for (i, v) in values.iter().enumerate() {
        ov = ov.set(&format!("{prefix}{}", i + 1), v.clone());
    }
    ov
}

fn check_len(n: usize, got: usize, what: &str) -> Result<(), DslError> {
    if n < 2 || got != n - 1 {
        return Err(DslError::Precondition {
            pos: Default::default(),
            message: format!("{what} needs n >= 2 and n - 1 entries, got n = {n} with {got}"),
        });
    }
    Ok(())
}

pub fn build_nmode_delayed_telefilter(
    n: usize,
    alphas: &[CoefExpr],
    phis: &[CoefExpr],
) -> Result<ProtocolOutput, DslError> {
    check_len(n, alphas.len(), "alphas")?;
    check_len(n, phis.len(), "phis")?;
    let ov = list_overrides(
        list_overrides(Overrides::new(), "alpha", alphas),
        "phi",
        phis,
    );
    build("nmode_delayed_telefilter", &[], n, ov)
}

pub fn build_nmode_nodelay_telefilter(
    n: usize,
    alphas: &[CoefExpr],
) -> Result<ProtocolOutput, DslError> {
    check_len(n, alphas.len(), "alphas")?;
    build(
        "nmode_nodelay_telefilter",
        &[],
        n,
        list_overrides(Overrides::new(), "alpha", alphas),
    )
}

/// DSL text of a registered protocol with the given arguments.
pub fn protocol_text(name: &str, args: &[(String, CoefExpr)]) -> Result<String, String> {
    expand_invocation(name, args).map(|c| crate::dsl::serialize(&c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_circuit, serialize};

    #[test]
    fn every_default_circuit_round_trips() {
        for p in registry() {
            let c = p.circuit(&p.default_opts(), Overrides::new()).unwrap();
            let text = serialize(&c);
            let back = parse_circuit(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", p.name));
            assert_eq!(serialize(&back), text, "{}", p.name);
        }
    }

    #[test]
    fn unknown_arguments_are_rejected() {
        let e = expand_invocation("delayed_telefilter", &[("beta".into(), CoefExpr::one())])
            .unwrap_err();
        assert!(e.contains("no parameter `beta`"), "{e}");
        let e = expand_invocation(
            "atemporal_telefilter",
            &[("gain".into(), CoefExpr::param("huge"))],
        )
        .unwrap_err();
        assert!(e.contains("must be one of"), "{e}");
    }

    #[test]
    fn every_declared_expectation_holds() {
        for p in registry() {
            for c in p.option_combinations() {
                let opts = p.opts(&c, 4).unwrap();
                let circ = p.circuit(&opts, Overrides::new()).unwrap();
                let out = evaluate_circuit(&circ, &ParamEnv::new())
                    .unwrap_or_else(|e| panic!("{} {c:?}: {e}", p.name));
                assert!(
                    !out.expected.is_empty() || !out.expected_limit.is_empty(),
                    "{}",
                    p.name
                );
                for r in crate::verify::check_expectations(&out, crate::verify::LIMIT_TOL).unwrap()
                {
                    assert!(r.pass, "{} {c:?} {}: {:e}", p.name, r.key, r.residual);
                }
            }
        }
    }
}
