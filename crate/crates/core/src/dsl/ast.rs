use std::fmt;

use crate::opalg::{CoefExpr, Component, ModeKind, ParamValue};
use crate::output::Side;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

/// One term `[dag(]WIRE[.perp][)] = EXPR` of a `modes(...)` list.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTerm {
    pub wire: String,
    pub component: Component,
    pub dagger: bool,
    pub coef: CoefExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Comment(String),
    Blank,
    Param {
        name: String,
        value: ParamValue,
    },
    Mode {
        kind: ModeKind,
        name: String,
        rail: String,
        bin: u32,
    },
    Split {
        out: [String; 2],
        t: String,
        r: String,
        alpha: CoefExpr,
        phi: CoefExpr,
    },
    Squeeze {
        out: [String; 2],
        a: String,
        b: String,
        gain: CoefExpr,
        phase: CoefExpr,
    },
    Unsqueeze {
        out: [String; 2],
        a: String,
        b: String,
        gain: CoefExpr,
    },
    Phase {
        out: String,
        input: String,
        phi: CoefExpr,
    },
    Homodyne {
        out: String,
        signal: String,
        resource: String,
        xphase: CoefExpr,
        pphase: CoefExpr,
    },
    Combine {
        out: String,
        terms: Vec<(CoefExpr, String)>,
    },
    Displace {
        out: String,
        input: String,
        signal: String,
        gain: CoefExpr,
        bin: Option<u32>,
    },
    Output {
        name: String,
        wire: String,
        side: Side,
    },
    Target {
        name: String,
        terms: Vec<ModeTerm>,
    },
    /// `limit` expectations only hold once every `infinity` parameter is large.
    Expect {
        port: String,
        component: Component,
        limit: bool,
        terms: Vec<ModeTerm>,
    },
    Protocol {
        name: String,
        args: Vec<(String, CoefExpr)>,
    },
}

/// A statement and where it came from. Equality ignores the position.
#[derive(Clone, Debug)]
pub struct Statement {
    pub stmt: Stmt,
    pub pos: Pos,
}

impl PartialEq for Statement {
    fn eq(&self, other: &Self) -> bool {
        self.stmt == other.stmt
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    pub statements: Vec<Statement>,
}

impl Circuit {
    pub fn new() -> Self {
        Circuit::default()
    }

    pub fn push(&mut self, stmt: Stmt) {
        let line = self.statements.len() + 1;
        self.statements.push(Statement {
            stmt,
            pos: Pos { line, col: 1 },
        });
    }

    pub fn extend(&mut self, other: Circuit) {
        for s in other.statements {
            self.push(s.stmt);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Stmt> {
        self.statements.iter().map(|s| &s.stmt)
    }

    /// Number of statements matching `pred`.
    pub fn count(&self, pred: impl Fn(&Stmt) -> bool) -> usize {
        self.iter().filter(|s| pred(s)).count()
    }
}

fn fmt_terms(f: &mut fmt::Formatter<'_>, terms: &[ModeTerm]) -> fmt::Result {
    write!(f, "modes(")?;
    for (i, t) in terms.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        let wire = match t.component {
            Component::Zero => t.wire.clone(),
            Component::Perp => format!("{}.perp", t.wire),
        };
        if t.dagger {
            write!(f, "dag({wire})={}", t.coef)?;
        } else {
            write!(f, "{wire}={}", t.coef)?;
        }
    }
    write!(f, ")")
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Comment(text) => write!(f, "#{text}"),
            Stmt::Blank => Ok(()),
            Stmt::Param { name, value } => write!(f, "param {name} = {value}"),
            Stmt::Mode {
                kind,
                name,
                rail,
                bin,
            } => {
                write!(f, "mode {} {name} rail={rail} bin={bin}", kind.keyword())
            }
            Stmt::Split {
                out,
                t,
                r,
                alpha,
                phi,
            } => write!(
                f,
                "({}, {}) = split({t}, {r}, alpha={alpha}, phi={phi})",
                out[0], out[1]
            ),
            Stmt::Squeeze {
                out,
                a,
                b,
                gain,
                phase,
            } => {
                write!(
                    f,
                    "({}, {}) = squeeze({a}, {b}, gain={gain}",
                    out[0], out[1]
                )?;
                if !phase.is_zero() {
                    write!(f, ", phase={phase}")?;
                }
                write!(f, ")")
            }
            Stmt::Unsqueeze { out, a, b, gain } => {
                write!(
                    f,
                    "({}, {}) = unsqueeze({a}, {b}, gain={gain})",
                    out[0], out[1]
                )
            }
            Stmt::Phase { out, input, phi } => write!(f, "{out} = phase({input}, phi={phi})"),
            Stmt::Homodyne {
                out,
                signal,
                resource,
                xphase,
                pphase,
            } => write!(
                f,
                "{out} = homodyne({signal}, {resource}, xphase={xphase}, pphase={pphase})"
            ),
            Stmt::Combine { out, terms } => {
                write!(f, "{out} = combine(")?;
                for (i, (w, m)) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", w.clone() * CoefExpr::param(m))?;
                }
                write!(f, ")")
            }
            Stmt::Displace {
                out,
                input,
                signal,
                gain,
                bin,
            } => {
                write!(f, "{out} = displace({input}, {signal}, gain={gain}")?;
                if let Some(b) = bin {
                    write!(f, ", bin={b}")?;
                }
                write!(f, ")")
            }
            Stmt::Output { name, wire, side } => {
                write!(f, "output {name} = {wire} side={}", side.keyword())
            }
            Stmt::Target { name, terms } => {
                write!(f, "target {name} = ")?;
                fmt_terms(f, terms)
            }
            Stmt::Expect {
                port,
                component,
                limit,
                terms,
            } => {
                write!(f, "expect ")?;
                if *limit {
                    write!(f, "limit ")?;
                }
                match component {
                    Component::Zero => write!(f, "{port} = ")?,
                    Component::Perp => write!(f, "{port}.perp = ")?,
                }
                fmt_terms(f, terms)
            }
            Stmt::Protocol { name, args } => {
                write!(f, "protocol {name}(")?;
                for (i, (k, v)) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k}={v}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{}", s.stmt)?;
        }
        Ok(())
    }
}

/// Canonical text form; parsing it yields a structurally equal circuit.
pub fn serialize(c: &Circuit) -> String {
    c.to_string()
}
