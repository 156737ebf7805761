//! Small statement emitter used by the protocol builders.

use crate::dsl::{parse_expr, Circuit, ModeTerm, Stmt};
use crate::opalg::{CoefExpr, Component, ModeKind, ParamValue};
use crate::output::Side;

/// Parses a constant builder expression.
pub(crate) fn ex(text: &str) -> CoefExpr {
    match parse_expr(text) {
        Ok(e) => e,
        Err(err) => panic!("builder expression `{text}` does not parse: {err}"),
    }
}

pub(crate) fn t(wire: &str, coef: CoefExpr) -> ModeTerm {
    ModeTerm {
        wire: wire.to_string(),
        component: Component::Zero,
        dagger: false,
        coef,
    }
}

pub(crate) fn td(wire: &str, coef: CoefExpr) -> ModeTerm {
    ModeTerm {
        dagger: true,
        ..t(wire, coef)
    }
}

pub(crate) fn tp(wire: &str, coef: CoefExpr) -> ModeTerm {
    ModeTerm {
        component: Component::Perp,
        ..t(wire, coef)
    }
}

#[derive(Default)]
pub(crate) struct B {
    pub c: Circuit,
}

impl B {
    pub fn comment(&mut self, text: &str) {
        self.c.push(Stmt::Comment(format!(" {text}")));
    }

    pub fn blank(&mut self) {
        self.c.push(Stmt::Blank);
    }

    pub fn param(&mut self, name: &str, value: ParamValue) {
        self.c.push(Stmt::Param {
            name: name.to_string(),
            value,
        });
    }

    pub fn mode(&mut self, kind: ModeKind, name: &str, rail: &str, bin: u32) {
        self.c.push(Stmt::Mode {
            kind,
            name: name.to_string(),
            rail: rail.to_string(),
            bin,
        });
    }

    pub fn split(&mut self, out: [&str; 2], t: &str, r: &str, alpha: CoefExpr, phi: CoefExpr) {
        self.c.push(Stmt::Split {
            out: out.map(str::to_string),
            t: t.to_string(),
            r: r.to_string(),
            alpha,
            phi,
        });
    }

    pub fn squeeze(&mut self, out: [&str; 2], a: &str, b: &str, gain: CoefExpr, phase: CoefExpr) {
        self.c.push(Stmt::Squeeze {
            out: out.map(str::to_string),
            a: a.to_string(),
            b: b.to_string(),
            gain,
            phase,
        });
    }

    pub fn unsqueeze(&mut self, out: [&str; 2], a: &str, b: &str, gain: CoefExpr) {
        self.c.push(Stmt::Unsqueeze {
            out: out.map(str::to_string),
            a: a.to_string(),
            b: b.to_string(),
            gain,
        });
    }

    pub fn phase(&mut self, out: &str, input: &str, phi: CoefExpr) {
        self.c.push(Stmt::Phase {
            out: out.to_string(),
            input: input.to_string(),
            phi,
        });
    }

    pub fn homodyne(&mut self, out: &str, signal: &str, resource: &str, xphase: CoefExpr) {
        let pphase = xphase.clone() + ex("pi/2");
        self.c.push(Stmt::Homodyne {
            out: out.to_string(),
            signal: signal.to_string(),
            resource: resource.to_string(),
            xphase,
            pphase,
        });
    }

    pub fn combine(&mut self, out: &str, terms: Vec<(CoefExpr, String)>) {
        self.c.push(Stmt::Combine {
            out: out.to_string(),
            terms,
        });
    }

    pub fn displace(&mut self, out: &str, input: &str, signal: &str, gain: CoefExpr) {
        self.c.push(Stmt::Displace {
            out: out.to_string(),
            input: input.to_string(),
            signal: signal.to_string(),
            gain,
            bin: None,
        });
    }

    pub fn output(&mut self, name: &str, wire: &str, side: Side) {
        self.c.push(Stmt::Output {
            name: name.to_string(),
            wire: wire.to_string(),
            side,
        });
    }

    pub fn target(&mut self, name: &str, terms: Vec<ModeTerm>) {
        self.c.push(Stmt::Target {
            name: name.to_string(),
            terms,
        });
    }

    pub fn expect(&mut self, port: &str, terms: Vec<ModeTerm>) {
        self.expect_full(port, Component::Zero, false, terms);
    }

    pub fn expect_perp(&mut self, port: &str, terms: Vec<ModeTerm>) {
        self.expect_full(port, Component::Perp, false, terms);
    }

    pub fn expect_limit(&mut self, port: &str, terms: Vec<ModeTerm>) {
        self.expect_full(port, Component::Zero, true, terms);
    }

    pub fn expect_limit_perp(&mut self, port: &str, terms: Vec<ModeTerm>) {
        self.expect_full(port, Component::Perp, true, terms);
    }

    fn expect_full(&mut self, port: &str, component: Component, limit: bool, terms: Vec<ModeTerm>) {
        self.c.push(Stmt::Expect {
            port: port.to_string(),
            component,
            limit,
            terms,
        });
    }
}
