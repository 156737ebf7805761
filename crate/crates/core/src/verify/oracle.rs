//! Gaussian moment propagation in the quadrature picture.
//!
//! Each rail is tracked as the pair of rows expressing its X and P quadratures
//! in terms of the input quadratures; variances follow from the input
//! covariance matrix. Nothing here shares code with the operator pipeline.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::dsl::{circuit_env, expand, validate, Circuit, DslError, Stmt};
use crate::opalg::{CoefExpr, ParamEnv};
use crate::EvalError;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{0}")]
    Circuit(#[from] DslError),
    #[error("{0}")]
    Eval(#[from] EvalError),
    #[error("parameter `{0}` is infinite; the oracle needs finite values")]
    Infinite(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadVariances {
    pub x: f64,
    pub p: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentRecord {
    /// Keyed by `port` and `port.perp`.
    pub variances: BTreeMap<String, QuadVariances>,
    /// First moments; every input is vacuum, so these stay at the origin.
    pub means: BTreeMap<String, (f64, f64)>,
}

/// X and P rows over the input quadratures.
#[derive(Clone, Debug)]
struct Quad {
    x: DVector<f64>,
    p: DVector<f64>,
}

impl Quad {
    fn zeros(n: usize) -> Self {
        Quad {
            x: DVector::zeros(n),
            p: DVector::zeros(n),
        }
    }

    /// Quadratures of `Σ (c·I + d·I†)`.
    fn linear(n: usize, terms: &[(Complex64, Complex64, &Quad)]) -> Self {
        let mut q = Quad::zeros(n);
        for (c, d, i) in terms {
            let (s, t) = (c + d, c - d);
            q.x += &i.x * s.re - &i.p * t.im;
            q.p += &i.x * s.im + &i.p * t.re;
        }
        q
    }

    /// `X(φ) = cos φ·X + sin φ·P`.
    fn rotated(&self, phi: f64) -> DVector<f64> {
        &self.x * phi.cos() + &self.p * phi.sin()
    }
}

#[derive(Clone, Debug)]
struct Rail {
    zero: Quad,
    perp: Quad,
}

/// A classical record `M = re + i·im` with commuting hermitian parts.
#[derive(Clone, Debug)]
struct Record {
    re: DVector<f64>,
    im: DVector<f64>,
}

struct Walk<'e> {
    env: &'e ParamEnv,
    n: usize,
    rails: HashMap<String, Rail>,
    records: HashMap<String, Record>,
}

impl Walk<'_> {
    fn c(&self, e: &CoefExpr) -> Result<Complex64, EvalError> {
        e.eval_f64(self.env)
    }

    fn r(&self, e: &CoefExpr) -> Result<f64, EvalError> {
        Ok(self.c(e)?.re)
    }

    fn split(&self, t: &Quad, r: &Quad, alpha: f64, phi: f64) -> (Quad, Quad) {
        let sa = Complex64::new(alpha.sqrt(), 0.0);
        let sb = (1.0 - alpha).max(0.0).sqrt();
        let mi = Complex64::new(0.0, -1.0);
        let z = Complex64::new(0.0, 0.0);
        let minus = Quad::linear(
            self.n,
            &[(sa, z, r), (mi * Complex64::from_polar(sb, -phi), z, t)],
        );
        let plus = Quad::linear(
            self.n,
            &[(sa, z, t), (mi * Complex64::from_polar(sb, phi), z, r)],
        );
        (minus, plus)
    }

    fn squeeze(&self, a: &Quad, b: &Quad, ch: f64, sh: Complex64) -> (Quad, Quad) {
        let z = Complex64::new(0.0, 0.0);
        let ch = Complex64::new(ch, 0.0);
        (
            Quad::linear(self.n, &[(ch, z, a), (z, sh, b)]),
            Quad::linear(self.n, &[(ch, z, b), (z, sh, a)]),
        )
    }

    fn stmt(&mut self, st: &Stmt, index: &HashMap<String, usize>) -> Result<(), OracleError> {
        let n = self.n;
        match st {
            Stmt::Mode { name, .. } => {
                let k = index[name];
                let unit = |i: usize| DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
                let q = |i: usize| Quad {
                    x: unit(2 * i),
                    p: unit(2 * i + 1),
                };
                self.rails.insert(
                    name.clone(),
                    Rail {
                        zero: q(2 * k),
                        perp: q(2 * k + 1),
                    },
                );
            }
            Stmt::Split {
                out,
                t,
                r,
                alpha,
                phi,
            } => {
                let (alpha, phi) = (self.r(alpha)?, self.r(phi)?);
                let (rt, rr) = (&self.rails[t], &self.rails[r]);
                let (m0, p0) = self.split(&rt.zero, &rr.zero, alpha, phi);
                let (m1, p1) = self.split(&rt.perp, &rr.perp, alpha, phi);
                self.rails
                    .insert(out[0].clone(), Rail { zero: m0, perp: m1 });
                self.rails
                    .insert(out[1].clone(), Rail { zero: p0, perp: p1 });
            }
            Stmt::Squeeze {
                out,
                a,
                b,
                gain,
                phase,
            } => {
                let g = self.r(gain)?;
                let sh = Complex64::from_polar(g.sinh(), self.r(phase)?);
                self.squeeze_rails(out, a, b, g.cosh(), sh);
            }
            Stmt::Unsqueeze { out, a, b, gain } => {
                let g = self.r(gain)?;
                self.squeeze_rails(out, a, b, g.cosh(), Complex64::new(-g.sinh(), 0.0));
            }
            Stmt::Phase { out, input, phi } => {
                let w = Complex64::from_polar(1.0, self.r(phi)?);
                let z = Complex64::new(0.0, 0.0);
                let ri = &self.rails[input];
                let rail = Rail {
                    zero: Quad::linear(n, &[(w, z, &ri.zero)]),
                    perp: Quad::linear(n, &[(w, z, &ri.perp)]),
                };
                self.rails.insert(out.clone(), rail);
            }
            Stmt::Homodyne {
                out,
                signal,
                resource,
                xphase,
                pphase,
            } => {
                let (px, pp) = (self.r(xphase)?, self.r(pphase)?);
                let (s, r) = (&self.rails[signal].zero, &self.rails[resource].zero);
                let k = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                let z = Complex64::new(0.0, 0.0);
                let sum = Quad::linear(n, &[(k, z, r), (k, z, s)]);
                let diff = Quad::linear(n, &[(k, z, s), (-k, z, r)]);
                self.records.insert(
                    out.clone(),
                    Record {
                        re: diff.rotated(px),
                        im: sum.rotated(pp),
                    },
                );
            }
            Stmt::Combine { out, terms } => {
                let mut rec = Record {
                    re: DVector::zeros(n),
                    im: DVector::zeros(n),
                };
                for (w, m) in terms {
                    let w = self.c(w)?;
                    let m = &self.records[m];
                    rec.re += &m.re * w.re - &m.im * w.im;
                    rec.im += &m.re * w.im + &m.im * w.re;
                }
                self.records.insert(out.clone(), rec);
            }
            Stmt::Displace {
                out,
                input,
                signal,
                gain,
                ..
            } => {
                let z = self.c(gain)?;
                let m = &self.records[signal];
                let mut rail = self.rails[input].clone();
                rail.zero.x += &m.re * (2.0 * z.re) - &m.im * (2.0 * z.im);
                rail.zero.p += &m.re * (2.0 * z.im) + &m.im * (2.0 * z.re);
                self.rails.insert(out.clone(), rail);
            }
            _ => {}
        }
        Ok(())
    }

    fn squeeze_rails(&mut self, out: &[String; 2], a: &str, b: &str, ch: f64, sh: Complex64) {
        let (ra, rb) = (&self.rails[a], &self.rails[b]);
        let (x, y) = self.squeeze(&ra.zero, &rb.zero, ch, sh);
        let (pa, pb) = (ra.perp.clone(), rb.perp.clone());
        self.rails
            .insert(out[0].clone(), Rail { zero: x, perp: pa });
        self.rails
            .insert(out[1].clone(), Rail { zero: y, perp: pb });
    }
}

/// Propagates the vacuum covariance matrix through the circuit in `f64`.
pub fn covariance_oracle(circuit: &Circuit, user: &ParamEnv) -> Result<MomentRecord, OracleError> {
    validate(circuit).map_err(DslError::from)?;
    let c = expand(circuit).map_err(DslError::from)?;
    let env = circuit_env(&c, user)?;
    if let Some(p) = env.infinite_params().into_iter().next() {
        return Err(OracleError::Infinite(p));
    }
    let mut index = HashMap::new();
    for st in c.iter() {
        if let Stmt::Mode { name, .. } = st {
            let k = index.len();
            index.insert(name.clone(), k);
        }
    }
    let n = 4 * index.len();
    let cov = DMatrix::<f64>::identity(n, n);
    let mut w = Walk {
        env: &env,
        n,
        rails: HashMap::new(),
        records: HashMap::new(),
    };
    let mut variances = BTreeMap::new();
    let mut means = BTreeMap::new();
    for st in c.iter() {
        w.stmt(st, &index)?;
        if let Stmt::Output { name, wire, .. } = st {
            let rail = &w.rails[wire];
            for (key, q) in [
                (name.clone(), &rail.zero),
                (format!("{name}.perp"), &rail.perp),
            ] {
                let var = |v: &DVector<f64>| (v.transpose() * &cov * v)[(0, 0)];
                variances.insert(
                    key.clone(),
                    QuadVariances {
                        x: var(&q.x),
                        p: var(&q.p),
                    },
                );
                means.insert(key, (0.0, 0.0));
            }
        }
    }
    Ok(MomentRecord { variances, means })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::evaluate_circuit;
    use crate::opalg::quadrature_variance;
    use crate::protocols::{registry, Overrides};

    fn finite_env(c: &Circuit) -> ParamEnv {
        let mut env = ParamEnv::new();
        for p in circuit_env(c, &ParamEnv::new()).unwrap().infinite_params() {
            env.set(&p, 0.8);
        }
        env
    }

    #[test]
    fn matches_operator_variances_on_every_protocol() {
        for p in registry() {
            for combo in p.option_combinations() {
                let c = p
                    .circuit(&p.opts(&combo, 3).unwrap(), Overrides::new())
                    .unwrap();
                let env = finite_env(&c);
                let rec = covariance_oracle(&c, &env).unwrap();
                let out = evaluate_circuit(&c, &env).unwrap();
                for (name, port) in &out.ports {
                    for (key, e) in [
                        (name.clone(), &port.state.zero),
                        (format!("{name}.perp"), &port.state.perp),
                    ] {
                        let v = rec.variances[&key];
                        let x = quadrature_variance(e, 0.0, &out.env).unwrap();
                        let pp =
                            quadrature_variance(e, std::f64::consts::FRAC_PI_2, &out.env).unwrap();
                        let tol = 1e-10 * x.max(pp).max(1.0);
                        assert!(
                            (v.x - x).abs() <= tol && (v.p - pp).abs() <= tol,
                            "{} {key}: {v:?} vs ({x}, {pp})",
                            p.name
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn passive_network_keeps_vacuum_variances() {
        let c = crate::dsl::parse_circuit(
            "mode vacuum a rail=x bin=0\nmode vacuum b rail=y bin=0\n(c, d) = split(a, b, alpha=0.3, phi=0.4)\ne = phase(c, phi=1.1)\noutput e = e\noutput d = d\n",
        )
        .unwrap();
        let rec = covariance_oracle(&c, &ParamEnv::new()).unwrap();
        for v in rec.variances.values() {
            assert!((v.x - 1.0).abs() < 1e-12 && (v.p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn infinite_parameters_are_refused() {
        let p = crate::protocols::lookup("atemporal_telefilter").unwrap();
        let c = p.circuit(&p.default_opts(), Overrides::new()).unwrap();
        assert_eq!(
            covariance_oracle(&c, &ParamEnv::new()).unwrap_err(),
            OracleError::Infinite("s".into())
        );
    }
}
