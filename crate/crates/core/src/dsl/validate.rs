use std::collections::{HashMap, HashSet};

use crate::dsl::ast::{Circuit, ModeTerm, Pos, Statement, Stmt};
use crate::dsl::parser::ParseError;
use crate::opalg::{CoefExpr, ParamValue};
use crate::protocols;

const MAX_EXPANSION_DEPTH: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sym {
    Param,
    Rail,
    Classical,
}

/// Replaces every `protocol` statement by the circuit it names.
///
/// Parameters the invocation would declare are skipped when the surrounding
/// circuit already declared them.
pub fn expand(c: &Circuit) -> Result<Circuit, ParseError> {
    let mut out = Circuit::new();
    let mut params = HashSet::new();
    expand_into(c, &mut out, &mut params, 0, None)?;
    Ok(out)
}

fn expand_into(
    c: &Circuit,
    out: &mut Circuit,
    params: &mut HashSet<String>,
    depth: usize,
    at: Option<Pos>,
) -> Result<(), ParseError> {
    for s in &c.statements {
        let pos = at.unwrap_or(s.pos);
        match &s.stmt {
            Stmt::Protocol { name, args } => {
                if depth >= MAX_EXPANSION_DEPTH {
                    return Err(ParseError::new(
                        pos,
                        "protocol invocations nested too deeply",
                    ));
                }
                for (k, _) in args {
                    if params.contains(k) {
                        return Err(ParseError::new(
                            pos,
                            format!(
                                "argument `{k}` conflicts with an existing parameter declaration"
                            ),
                        ));
                    }
                }
                let inner = protocols::expand_invocation(name, args)
                    .map_err(|m| ParseError::new(pos, m))?;
                let mut filtered = Circuit::new();
                for st in inner.statements {
                    if let Stmt::Param { name, .. } = &st.stmt {
                        if params.contains(name) {
                            continue;
                        }
                    }
                    filtered.statements.push(st);
                }
                expand_into(&filtered, out, params, depth + 1, Some(pos))?;
            }
            other => {
                if let Stmt::Param { name, .. } = other {
                    params.insert(name.clone());
                }
                out.statements.push(Statement {
                    stmt: other.clone(),
                    pos,
                });
            }
        }
    }
    Ok(())
}

struct Scope {
    syms: HashMap<String, Sym>,
    consumed: HashMap<String, Pos>,
    rails: HashMap<String, u32>,
    ports: HashSet<String>,
    targets: HashSet<String>,
}

impl Scope {
    fn define(&mut self, name: &str, sym: Sym, pos: Pos) -> Result<(), ParseError> {
        if self.syms.contains_key(name) {
            return Err(ParseError::new(pos, format!("`{name}` is already defined")));
        }
        self.syms.insert(name.to_string(), sym);
        Ok(())
    }

    fn expr(&self, e: &CoefExpr, pos: Pos) -> Result<(), ParseError> {
        for p in e.params() {
            match self.syms.get(&p) {
                Some(Sym::Param) => {}
                Some(_) => {
                    return Err(ParseError::new(
                        pos,
                        format!("`{p}` is a wire, not a parameter"),
                    ))
                }
                None => return Err(ParseError::new(pos, format!("unknown parameter `{p}`"))),
            }
        }
        Ok(())
    }

    fn rail(&self, name: &str, pos: Pos) -> Result<(), ParseError> {
        match self.syms.get(name) {
            Some(Sym::Rail) => Ok(()),
            Some(Sym::Classical) => Err(ParseError::new(
                pos,
                format!("`{name}` is a classical signal, not an optical wire"),
            )),
            Some(Sym::Param) => Err(ParseError::new(
                pos,
                format!("`{name}` is a parameter, not a wire"),
            )),
            None => Err(ParseError::new(
                pos,
                format!("wire `{name}` is used before it is defined"),
            )),
        }
    }

    fn consume(&mut self, name: &str, pos: Pos) -> Result<(), ParseError> {
        self.rail(name, pos)?;
        if let Some(prev) = self.consumed.get(name) {
            return Err(ParseError::new(
                pos,
                format!("wire `{name}` was already consumed at line {}", prev.line),
            ));
        }
        self.consumed.insert(name.to_string(), pos);
        Ok(())
    }

    fn classical(&self, name: &str, pos: Pos) -> Result<(), ParseError> {
        match self.syms.get(name) {
            Some(Sym::Classical) => Ok(()),
            Some(_) => Err(ParseError::new(
                pos,
                format!("`{name}` is not a classical signal"),
            )),
            None => Err(ParseError::new(
                pos,
                format!("classical signal `{name}` is used before it is defined"),
            )),
        }
    }

    fn terms(&self, terms: &[ModeTerm], pos: Pos) -> Result<(), ParseError> {
        for t in terms {
            self.rail(&t.wire, pos)?;
            self.expr(&t.coef, pos)?;
        }
        Ok(())
    }
}

/// Resolves identifiers: define-before-use, single assignment, single
/// consumption of optical wires, kind checks and per-rail bin order.
pub fn validate(c: &Circuit) -> Result<(), ParseError> {
    let c = expand(c)?;
    let mut sc = Scope {
        syms: HashMap::new(),
        consumed: HashMap::new(),
        rails: HashMap::new(),
        ports: HashSet::new(),
        targets: HashSet::new(),
    };
    for s in &c.statements {
        let pos = s.pos;
        match &s.stmt {
            Stmt::Comment(_) | Stmt::Blank => {}
            Stmt::Protocol { .. } => unreachable!("expanded above"),
            Stmt::Param { name, value } => {
                if let ParamValue::Value(e) = value {
                    sc.expr(e, pos)?;
                }
                sc.define(name, Sym::Param, pos)?;
            }
            Stmt::Mode {
                name, rail, bin, ..
            } => {
                if let Some(&last) = sc.rails.get(rail) {
                    if *bin < last {
                        return Err(ParseError::new(
                            pos,
                            format!("mode `{name}` at bin {bin} precedes bin {last} already on rail `{rail}`"),
                        ));
                    }
                }
                sc.rails.insert(rail.clone(), *bin);
                sc.define(name, Sym::Rail, pos)?;
            }
            Stmt::Split {
                out,
                t,
                r,
                alpha,
                phi,
            } => {
                two_inputs(&mut sc, t, r, pos)?;
                sc.expr(alpha, pos)?;
                sc.expr(phi, pos)?;
                two_outputs(&mut sc, out, pos)?;
            }
            Stmt::Squeeze {
                out,
                a,
                b,
                gain,
                phase,
            } => {
                two_inputs(&mut sc, a, b, pos)?;
                sc.expr(gain, pos)?;
                sc.expr(phase, pos)?;
                two_outputs(&mut sc, out, pos)?;
            }
            Stmt::Unsqueeze { out, a, b, gain } => {
                two_inputs(&mut sc, a, b, pos)?;
                sc.expr(gain, pos)?;
                two_outputs(&mut sc, out, pos)?;
            }
            Stmt::Phase { out, input, phi } => {
                sc.consume(input, pos)?;
                sc.expr(phi, pos)?;
                sc.define(out, Sym::Rail, pos)?;
            }
            Stmt::Homodyne {
                out,
                signal,
                resource,
                xphase,
                pphase,
            } => {
                two_inputs(&mut sc, signal, resource, pos)?;
                sc.expr(xphase, pos)?;
                sc.expr(pphase, pos)?;
                sc.define(out, Sym::Classical, pos)?;
            }
            Stmt::Combine { out, terms } => {
                for (w, m) in terms {
                    sc.classical(m, pos)?;
                    sc.expr(w, pos)?;
                }
                sc.define(out, Sym::Classical, pos)?;
            }
            Stmt::Displace {
                out,
                input,
                signal,
                gain,
                ..
            } => {
                sc.consume(input, pos)?;
                sc.classical(signal, pos)?;
                sc.expr(gain, pos)?;
                sc.define(out, Sym::Rail, pos)?;
            }
            Stmt::Output { name, wire, .. } => {
                sc.rail(wire, pos)?;
                if !sc.ports.insert(name.clone()) {
                    return Err(ParseError::new(
                        pos,
                        format!("output `{name}` is already defined"),
                    ));
                }
            }
            Stmt::Target { name, terms } => {
                sc.terms(terms, pos)?;
                if !sc.targets.insert(name.clone()) {
                    return Err(ParseError::new(
                        pos,
                        format!("target `{name}` is already defined"),
                    ));
                }
            }
            Stmt::Expect { port, terms, .. } => {
                if !sc.ports.contains(port) {
                    return Err(ParseError::new(pos, format!("unknown output `{port}`")));
                }
                sc.terms(terms, pos)?;
            }
        }
    }
    Ok(())
}

fn two_inputs(sc: &mut Scope, a: &str, b: &str, pos: Pos) -> Result<(), ParseError> {
    if a == b {
        return Err(ParseError::new(
            pos,
            format!("wire `{a}` is used twice by one element"),
        ));
    }
    sc.consume(a, pos)?;
    sc.consume(b, pos)
}

fn two_outputs(sc: &mut Scope, out: &[String; 2], pos: Pos) -> Result<(), ParseError> {
    sc.define(&out[0], Sym::Rail, pos)?;
    sc.define(&out[1], Sym::Rail, pos)
}

#[cfg(test)]
mod tests {
    use crate::dsl::parser::parse_circuit;

    fn err(src: &str) -> String {
        let e = parse_circuit(src).unwrap_err();
        format!("{} {}", e.pos.line, e.message)
    }

    const HEAD: &str = "param s = 1\nmode entanglement_seed e1 rail=a bin=0\nmode entanglement_seed e2 rail=b bin=0\n";

    #[test]
    fn use_before_definition() {
        let e = err(&format!("{HEAD}(a0, b0) = squeeze(e1, e3, gain=s)\n"));
        assert_eq!(e, "4 wire `e3` is used before it is defined");
    }

    #[test]
    fn reassignment_and_reuse() {
        let e = err(&format!("{HEAD}(a0, e1) = squeeze(e1, e2, gain=s)\n"));
        assert!(e.contains("`e1` is already defined"), "{e}");
        let e = err(&format!(
            "{HEAD}(a0, b0) = squeeze(e1, e2, gain=s)\n(x, y) = squeeze(a0, e1, gain=s)\n"
        ));
        assert!(e.starts_with("5 wire `e1` was already consumed"), "{e}");
    }

    #[test]
    fn unknown_parameter() {
        let e = err(&format!("{HEAD}(a0, b0) = squeeze(e1, e2, gain=q)\n"));
        assert_eq!(e, "4 unknown parameter `q`");
    }

    #[test]
    fn kinds_are_checked() {
        let e = err(&format!("{HEAD}x = displace(e1, e2, gain=1)\n"));
        assert!(e.contains("not a classical signal"), "{e}");
        let e = err(&format!(
            "{HEAD}M = homodyne(e1, e2, xphase=0, pphase=pi/2)\ny = phase(M, phi=1)\n"
        ));
        assert!(e.contains("classical signal, not an optical wire"), "{e}");
    }

    #[test]
    fn rail_bins_are_monotone() {
        let e = err("mode signal j1 rail=x bin=2\nmode signal j2 rail=x bin=1\n");
        assert!(e.starts_with("2 mode `j2` at bin 1 precedes bin 2"), "{e}");
    }

    #[test]
    fn expectations_need_outputs() {
        let e = err(&format!("{HEAD}expect out = modes(e1=1)\n"));
        assert_eq!(e, "4 unknown output `out`");
    }

    #[test]
    fn protocol_expansion() {
        let c = parse_circuit("param s = 3\nprotocol atemporal_telefilter(gain=tanh)\n").unwrap();
        let x = super::expand(&c).unwrap();
        let params = x.count(|s| matches!(s, crate::dsl::Stmt::Param { .. }));
        assert_eq!(params, 1);
        let e = err("protocol no_such_thing()\n");
        assert!(e.starts_with("1 unknown protocol"), "{e}");
    }
}
