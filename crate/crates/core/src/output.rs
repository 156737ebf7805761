//! The evaluated form of a circuit: named ports, classical channels and registries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::elements::{ClassicalSignal, RailState};
use crate::opalg::{ModeExpr, ModeId, ParamEnv};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Transmitted,
    Reflected,
    /// A single time bin's output before any recombination.
    Perbin,
    /// Intermediate values exposed for inspection.
    Aux,
}

impl Side {
    pub fn keyword(self) -> &'static str {
        match self {
            Side::Transmitted => "transmitted",
            Side::Reflected => "reflected",
            Side::Perbin => "perbin",
            Side::Aux => "aux",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Side> {
        [Side::Transmitted, Side::Reflected, Side::Perbin, Side::Aux]
            .into_iter()
            .find(|k| k.keyword() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Port {
    pub side: Side,
    pub state: RailState,
    /// Earliest bin at which the port can be emitted.
    pub bin: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalChannel {
    pub signal: ClassicalSignal,
    pub bin: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProtocolOutput {
    pub ports: BTreeMap<String, Port>,
    pub classical: BTreeMap<String, ClassicalChannel>,
    /// Every fundamental input, both components, in declaration order.
    pub inputs: Vec<ModeId>,
    /// Closed-form expectations keyed by `port` or `port.perp`.
    pub expected: BTreeMap<String, ModeExpr>,
    /// Expectations that hold only in the limit of the `infinity` parameters.
    pub expected_limit: BTreeMap<String, ModeExpr>,
    pub targets: BTreeMap<String, ModeExpr>,
    /// Final value of every rail wire, consumed or not.
    pub wires: BTreeMap<String, RailState>,
    pub env: ParamEnv,
    pub flags: Vec<String>,
}

impl ProtocolOutput {
    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.get(name)
    }

    /// Matched component of the named port.
    pub fn zero(&self, name: &str) -> Option<&ModeExpr> {
        self.ports.get(name).map(|p| &p.state.zero)
    }

    pub fn perp(&self, name: &str) -> Option<&ModeExpr> {
        self.ports.get(name).map(|p| &p.state.perp)
    }

    pub fn side(&self, side: Side) -> impl Iterator<Item = (&String, &Port)> {
        self.ports.iter().filter(move |(_, p)| p.side == side)
    }

    pub fn transmitted(&self) -> impl Iterator<Item = (&String, &Port)> {
        self.side(Side::Transmitted)
    }

    pub fn reflected(&self) -> impl Iterator<Item = (&String, &Port)> {
        self.side(Side::Reflected)
    }

    pub fn perbin(&self) -> impl Iterator<Item = (&String, &Port)> {
        self.side(Side::Perbin)
    }

    /// Both components of every transmitted and reflected port.
    pub fn full_output_set(&self) -> Vec<(String, ModeExpr)> {
        let mut out = Vec::new();
        for (name, p) in &self.ports {
            if matches!(p.side, Side::Transmitted | Side::Reflected) {
                out.push((name.clone(), p.state.zero.clone()));
                out.push((format!("{name}.perp"), p.state.perp.clone()));
            }
        }
        out
    }

    pub fn input(&self, label: &str) -> Option<&ModeId> {
        self.inputs.iter().find(|m| m.label() == label)
    }
}
