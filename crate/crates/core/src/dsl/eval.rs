use std::collections::HashMap;

use thiserror::Error;

use crate::dsl::ast::{Circuit, ModeTerm, Pos, Stmt};
use crate::dsl::parser::ParseError;
use crate::dsl::validate::{expand, validate};
use crate::elements::{
    apply_beamsplitter, apply_displace, apply_inverse_squeezer, apply_phase_shift,
    apply_two_mode_squeezer, classical_combine, dual_homodyne, RailState,
};
use crate::hp::Cx;
use crate::opalg::{CoefExpr, Component, Evaluator, ModeExpr, ModeId, ParamEnv, ParamValue};
use crate::output::{ClassicalChannel, Port, ProtocolOutput};
use crate::EvalError;

/// Residual below which a numeric quantity is treated as exactly zero.
pub const EXACT_TOL: f64 = 1e-40;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum DslError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{pos}: {source}")]
    Eval { pos: Pos, source: EvalError },
    #[error("{pos}: {message}")]
    Precondition { pos: Pos, message: String },
}

impl DslError {
    pub fn pos(&self) -> Pos {
        match self {
            DslError::Parse(e) => e.pos,
            DslError::Eval { pos, .. } | DslError::Precondition { pos, .. } => *pos,
        }
    }
}

/// Parameter defaults declared by the circuit, overlaid by `user`.
pub fn circuit_env(c: &Circuit, user: &ParamEnv) -> Result<ParamEnv, DslError> {
    let c = expand(c)?;
    let mut env = ParamEnv::new();
    for st in c.iter() {
        if let Stmt::Param { name, value } = st {
            env.set_value(name, value.clone());
        }
    }
    Ok(env.overlay(user))
}

struct Walker<'e> {
    ev: Evaluator<'e>,
    wires: HashMap<String, (RailState, u32)>,
    classical: HashMap<String, ClassicalChannel>,
    out: ProtocolOutput,
}

impl Walker<'_> {
    fn num(&mut self, e: &CoefExpr, pos: Pos) -> Result<Cx, DslError> {
        self.ev
            .eval(e)
            .map_err(|source| DslError::Eval { pos, source })
    }

    fn real(&mut self, e: &CoefExpr, what: &str, pos: Pos) -> Result<f64, DslError> {
        let z = self.num(e, pos)?;
        if crate::hp::to_f64(&z.im).abs() > 1e-12 {
            return Err(DslError::Precondition {
                pos,
                message: format!("{what} must be real"),
            });
        }
        Ok(crate::hp::to_f64(&z.re))
    }

    fn is_exactly(&mut self, e: &CoefExpr, v: f64, pos: Pos) -> Result<bool, DslError> {
        let z = self.num(e, pos)?;
        let h = self.ev.hp();
        let d = h.sub(&z, &h.from_f64(v));
        Ok(h.abs_f64(&d) < EXACT_TOL)
    }

    fn rail(&self, name: &str) -> (RailState, u32) {
        self.wires[name].clone()
    }

    fn put(&mut self, name: &str, st: RailState, bin: u32) {
        self.out.wires.insert(name.to_string(), st.clone());
        self.wires.insert(name.to_string(), (st, bin));
    }

    fn terms(&self, terms: &[ModeTerm]) -> ModeExpr {
        let mut acc = ModeExpr::zero();
        for t in terms {
            let (st, _) = &self.wires[&t.wire];
            let base = match t.component {
                Component::Zero => &st.zero,
                Component::Perp => &st.perp,
            };
            let op = if t.dagger {
                base.dagger()
            } else {
                base.clone()
            };
            acc = acc.plus(&op.scale(&t.coef));
        }
        acc
    }

    fn check_alpha(&mut self, alpha: &CoefExpr, line: &Pos) -> Result<(), DslError> {
        let pos = *line;
        let a = self.real(alpha, "alpha", pos)?;
        if !(-1e-12..=1.0 + 1e-12).contains(&a) {
            return Err(DslError::Precondition {
                pos,
                message: format!("split alpha = {a} lies outside [0, 1]"),
            });
        }
        if self.is_exactly(alpha, 0.0, pos)? || self.is_exactly(alpha, 1.0, pos)? {
            self.out.flags.push(format!(
                "line {}: split alpha = {a} is degenerate",
                pos.line
            ));
        }
        Ok(())
    }

    fn check_gain(&mut self, gain: &CoefExpr, pos: Pos) -> Result<(), DslError> {
        let g = self.real(gain, "gain", pos)?;
        if g < 0.0 {
            return Err(DslError::Precondition {
                pos,
                message: format!("squeezing gain = {g} is negative"),
            });
        }
        Ok(())
    }

    fn statement(&mut self, st: &Stmt, pos: Pos) -> Result<(), DslError> {
        match st {
            Stmt::Comment(_) | Stmt::Blank | Stmt::Param { .. } | Stmt::Protocol { .. } => {}
            Stmt::Mode {
                kind,
                name,
                rail,
                bin,
            } => {
                let id = ModeId::new(name, *kind, rail, *bin);
                let st = RailState::new(ModeExpr::input(&id), ModeExpr::input(&id.perp()));
                self.out.inputs.push(id.clone());
                self.out.inputs.push(id.perp());
                self.put(name, st, *bin);
            }
            Stmt::Split {
                out,
                t,
                r,
                alpha,
                phi,
            } => {
                self.check_alpha(alpha, &pos)?;
                self.real(phi, "phi", pos)?;
                let ((ts, tb), (rs, rb)) = (self.rail(t), self.rail(r));
                let (m, p) = apply_beamsplitter(&ts, &rs, alpha, phi);
                let bin = tb.max(rb);
                self.put(&out[0], m, bin);
                self.put(&out[1], p, bin);
            }
            Stmt::Squeeze {
                out,
                a,
                b,
                gain,
                phase,
            } => {
                self.check_gain(gain, pos)?;
                self.real(phase, "phase", pos)?;
                let ((sa, ba), (sb, bb)) = (self.rail(a), self.rail(b));
                let (x, y) = apply_two_mode_squeezer(&sa, &sb, gain, phase);
                self.put(&out[0], x, ba.max(bb));
                self.put(&out[1], y, ba.max(bb));
            }
            Stmt::Unsqueeze { out, a, b, gain } => {
                self.check_gain(gain, pos)?;
                let ((sa, ba), (sb, bb)) = (self.rail(a), self.rail(b));
                let (x, y) = apply_inverse_squeezer(&sa, &sb, gain);
                self.put(&out[0], x, ba.max(bb));
                self.put(&out[1], y, ba.max(bb));
            }
            Stmt::Phase { out, input, phi } => {
                self.real(phi, "phi", pos)?;
                let (s, b) = self.rail(input);
                self.put(out, apply_phase_shift(&s, phi), b);
            }
            Stmt::Homodyne {
                out,
                signal,
                resource,
                xphase,
                pphase,
            } => {
                let x = self.real(xphase, "xphase", pos)?;
                let p = self.real(pphase, "pphase", pos)?;
                let d = (p - x - std::f64::consts::FRAC_PI_2).rem_euclid(std::f64::consts::TAU);
                if d.min(std::f64::consts::TAU - d) > 1e-12 {
                    self.out.flags.push(format!(
                        "line {}: homodyne phases differ by {} rather than pi/2",
                        pos.line,
                        p - x
                    ));
                }
                let ((ss, sb), (rs, rb)) = (self.rail(signal), self.rail(resource));
                let m = dual_homodyne(&ss.zero, &rs.zero, xphase, pphase);
                let ch = ClassicalChannel {
                    signal: m,
                    bin: sb.max(rb),
                };
                self.out.classical.insert(out.clone(), ch.clone());
                self.classical.insert(out.clone(), ch);
            }
            Stmt::Combine { out, terms } => {
                let mut sigs = Vec::new();
                let mut bin = 0;
                for (w, m) in terms {
                    self.num(w, pos)?;
                    let ch = &self.classical[m];
                    bin = bin.max(ch.bin);
                    sigs.push((w.clone(), ch.signal.clone()));
                }
                let ch = ClassicalChannel {
                    signal: classical_combine(&sigs),
                    bin,
                };
                self.out.classical.insert(out.clone(), ch.clone());
                self.classical.insert(out.clone(), ch);
            }
            Stmt::Displace {
                out,
                input,
                signal,
                gain,
                bin,
            } => {
                self.num(gain, pos)?;
                let (s, b) = self.rail(input);
                let ch = self.classical[signal].clone();
                let emitted = bin.unwrap_or(b.max(ch.bin));
                self.put(out, apply_displace(&s, &ch.signal, gain), emitted);
            }
            Stmt::Output { name, wire, side } => {
                let (state, bin) = self.rail(wire);
                self.out.ports.insert(
                    name.clone(),
                    Port {
                        side: *side,
                        state,
                        bin,
                    },
                );
            }
            Stmt::Target { name, terms } => {
                let t = self.terms(terms);
                self.out.targets.insert(name.clone(), t);
            }
            Stmt::Expect {
                port,
                component,
                limit,
                terms,
            } => {
                let mut key = port.clone();
                if *component == Component::Perp {
                    key.push_str(".perp");
                }
                let e = self.terms(terms);
                if *limit {
                    self.out.expected_limit.insert(key, e);
                } else {
                    self.out.expected.insert(key, e);
                }
            }
        }
        Ok(())
    }
}

/// Lowers a circuit to element applications in statement order.
pub fn evaluate_circuit(c: &Circuit, user: &ParamEnv) -> Result<ProtocolOutput, DslError> {
    validate(c)?;
    let expanded = expand(c)?;
    let env = circuit_env(&expanded, user)?;
    let mut w = Walker {
        ev: Evaluator::new(&env),
        wires: HashMap::new(),
        classical: HashMap::new(),
        out: ProtocolOutput::default(),
    };
    for (name, v) in env.iter() {
        if let ParamValue::Value(e) = v {
            let pos = expanded
                .statements
                .iter()
                .find(|s| matches!(&s.stmt, Stmt::Param { name: n, .. } if n == name))
                .map(|s| s.pos)
                .unwrap_or_default();
            w.num(e, pos)?;
        }
    }
    for s in &expanded.statements {
        w.statement(&s.stmt, s.pos)?;
    }
    let mut out = w.out;
    out.env = env.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parser::parse_circuit;
    use num_complex::Complex64;

    const TELEFILTER: &str = "\
param s = infinity
mode entanglement_seed e1 rail=alice bin=0
mode entanglement_seed e2 rail=bob bin=0
mode signal j rail=input bin=0
(a0, b0) = squeeze(e1, e2, gain=s)
M = homodyne(j, a0, xphase=0, pphase=pi/2)
jout = displace(b0, M, gain=1/sqrt(2))
output out = jout side=transmitted
expect out = modes(j=1, b0=1, dag(a0)=-1)
";

    #[test]
    fn telefilter_reaches_identity() {
        let c = parse_circuit(TELEFILTER).unwrap();
        let out = evaluate_circuit(&c, &ParamEnv::new()).unwrap();
        let n = out.zero("out").unwrap().eval(&out.env).unwrap();
        assert!((n.c("j") - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(n.max_abs_excluding(&["j"]) < 3e-9);
        let exp = out.expected["out"].eval(&out.env).unwrap();
        assert!(n.distance(&exp) < 1e-14);
        assert_eq!(out.inputs.len(), 6);
    }

    #[test]
    fn user_env_overrides_defaults() {
        let c = parse_circuit(TELEFILTER).unwrap();
        let out = evaluate_circuit(&c, &ParamEnv::new().with("s", 1.0)).unwrap();
        let n = out.zero("out").unwrap().eval(&out.env).unwrap();
        assert!((n.c("e2").re - (-1f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn empty_circuit() {
        let out = evaluate_circuit(&Circuit::new(), &ParamEnv::new()).unwrap();
        assert!(out.ports.is_empty() && out.inputs.is_empty());
    }

    #[test]
    fn preconditions_carry_location() {
        let src = "param a = 2\nmode vacuum x rail=p bin=0\nmode vacuum y rail=q bin=0\n(m, n) = split(x, y, alpha=a, phi=0)\n";
        let e = evaluate_circuit(&parse_circuit(src).unwrap(), &ParamEnv::new()).unwrap_err();
        assert_eq!(e.pos().line, 4);
        let src = "param g = 0 - 1\nmode vacuum x rail=p bin=0\nmode vacuum y rail=q bin=0\n(m, n) = squeeze(x, y, gain=g)\n";
        let e = evaluate_circuit(&parse_circuit(src).unwrap(), &ParamEnv::new()).unwrap_err();
        assert!(e.to_string().contains("negative"), "{e}");
        let src = "param a = 1\nmode vacuum x rail=p bin=0\nmode vacuum y rail=q bin=0\n(m, n) = split(x, y, alpha=a, phi=0)\n";
        let out = evaluate_circuit(&parse_circuit(src).unwrap(), &ParamEnv::new()).unwrap();
        assert_eq!(out.flags.len(), 1);
    }

    #[test]
    fn unbound_parameter() {
        let src = "param s = r\n";
        assert!(parse_circuit(src).is_err());
    }
}
