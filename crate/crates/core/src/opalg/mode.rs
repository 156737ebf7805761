use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::hp::Cx;
use crate::opalg::coef::{CoefExpr, Evaluator};
use crate::opalg::env::ParamEnv;
use crate::EvalError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeKind {
    Vacuum,
    EntanglementSeed,
    Signal,
    LocalOscillator,
}

impl ModeKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ModeKind::Vacuum => "vacuum",
            ModeKind::EntanglementSeed => "entanglement_seed",
            ModeKind::Signal => "signal",
            ModeKind::LocalOscillator => "local_oscillator",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        [
            ModeKind::Vacuum,
            ModeKind::EntanglementSeed,
            ModeKind::Signal,
            ModeKind::LocalOscillator,
        ]
        .into_iter()
        .find(|k| k.keyword() == s)
    }
}

/// Which member of a rail's mode pair: the matched mode or its orthogonal complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Zero,
    Perp,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId {
    pub name: String,
    pub component: Component,
    pub rail: String,
    pub time_bin: u32,
    pub kind: ModeKind,
}

impl ModeId {
    pub fn new(name: &str, kind: ModeKind, rail: &str, time_bin: u32) -> Self {
        ModeId {
            name: name.to_string(),
            component: Component::Zero,
            rail: rail.to_string(),
            time_bin,
            kind,
        }
    }

    pub fn perp(&self) -> Self {
        ModeId {
            component: Component::Perp,
            ..self.clone()
        }
    }

    pub fn is_perp(&self) -> bool {
        self.component == Component::Perp
    }

    /// `name` for the matched mode, `name.perp` for its complement.
    pub fn label(&self) -> String {
        match self.component {
            Component::Zero => self.name.clone(),
            Component::Perp => format!("{}.perp", self.name),
        }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Σ (c·â + d·â†) over fundamental input modes, with symbolic coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModeExpr {
    terms: BTreeMap<ModeId, (CoefExpr, CoefExpr)>,
}

pub type HpMode = BTreeMap<ModeId, (Cx, Cx)>;

impl ModeExpr {
    pub fn zero() -> Self {
        ModeExpr::default()
    }

    pub fn input(id: &ModeId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(id.clone(), (CoefExpr::one(), CoefExpr::zero()));
        ModeExpr { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (ModeId, CoefExpr, CoefExpr)>) -> Self {
        let mut out = ModeExpr::zero();
        for (id, c, d) in terms {
            out.accumulate(&id, c, d);
        }
        out
    }

    fn accumulate(&mut self, id: &ModeId, c: CoefExpr, d: CoefExpr) {
        let entry = self.terms.remove(id);
        let (c, d) = match entry {
            Some((c0, d0)) => (c0 + c, d0 + d),
            None => (c, d),
        };
        if !(c.is_zero() && d.is_zero()) {
            self.terms.insert(id.clone(), (c, d));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ModeId, &(CoefExpr, CoefExpr))> {
        self.terms.iter()
    }

    pub fn get(&self, id: &ModeId) -> Option<&(CoefExpr, CoefExpr)> {
        self.terms.get(id)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Modes with a structurally nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = &ModeId> {
        self.terms.keys()
    }

    pub fn dagger(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(k, (c, d))| (k.clone(), (d.conj(), c.conj())))
            .collect();
        ModeExpr { terms }
    }

    pub fn scale(&self, k: &CoefExpr) -> Self {
        if k.is_zero() {
            return ModeExpr::zero();
        }
        let mut out = ModeExpr::zero();
        for (id, (c, d)) in &self.terms {
            out.accumulate(id, k.clone() * c.clone(), k.clone() * d.clone());
        }
        out
    }

    pub fn plus(&self, other: &ModeExpr) -> Self {
        let mut out = self.clone();
        for (id, (c, d)) in &other.terms {
            out.accumulate(id, c.clone(), d.clone());
        }
        out
    }

    pub fn minus(&self, other: &ModeExpr) -> Self {
        self.plus(&other.scale(&-CoefExpr::one()))
    }

    pub fn eval_hp(&self, ev: &mut Evaluator<'_>) -> Result<HpMode, EvalError> {
        let mut out = HpMode::new();
        for (id, (c, d)) in &self.terms {
            out.insert(id.clone(), (ev.eval(c)?, ev.eval(d)?));
        }
        Ok(out)
    }

    pub fn eval_with(&self, ev: &mut Evaluator<'_>) -> Result<NumMode, EvalError> {
        let hp = self.eval_hp(ev)?;
        Ok(NumMode::from_hp(ev, &hp))
    }

    pub fn eval(&self, env: &ParamEnv) -> Result<NumMode, EvalError> {
        let mut ev = Evaluator::new(env);
        self.eval_with(&mut ev)
    }
}

impl fmt::Display for ModeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (id, (c, d)) in &self.terms {
            for (k, dag) in [(c, false), (d, true)] {
                if k.is_zero() {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                let op = if dag {
                    format!("dag({id})")
                } else {
                    id.label()
                };
                if k.is_one() {
                    write!(f, "{op}")?;
                } else {
                    write!(f, "({k})*{op}")?;
                }
            }
        }
        Ok(())
    }
}

/// Numerically evaluated mode expression.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NumMode {
    pub terms: BTreeMap<ModeId, (Complex64, Complex64)>,
}

impl NumMode {
    pub fn from_hp(ev: &mut Evaluator<'_>, hp: &HpMode) -> Self {
        let h = ev.hp();
        let terms = hp
            .iter()
            .map(|(k, (c, d))| (k.clone(), (h.to_c64(c), h.to_c64(d))))
            .collect();
        NumMode { terms }
    }

    fn find(&self, label: &str) -> Option<&(Complex64, Complex64)> {
        self.terms
            .iter()
            .find(|(k, _)| k.label() == label)
            .map(|(_, v)| v)
    }

    /// Annihilation coefficient on the mode labelled `label` (`j1`, `j1.perp`).
    pub fn c(&self, label: &str) -> Complex64 {
        self.find(label).map(|v| v.0).unwrap_or_default()
    }

    /// Creation coefficient on the mode labelled `label`.
    pub fn d(&self, label: &str) -> Complex64 {
        self.find(label).map(|v| v.1).unwrap_or_default()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .map(|(c, d)| c.norm().max(d.norm()))
            .fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude over modes whose label is not listed.
    pub fn max_abs_excluding(&self, labels: &[&str]) -> f64 {
        self.terms
            .iter()
            .filter(|(k, _)| !labels.contains(&k.label().as_str()))
            .map(|(_, (c, d))| c.norm().max(d.norm()))
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &NumMode) -> f64 {
        let mut m: f64 = 0.0;
        for (k, (c, d)) in &self.terms {
            let (e, f) = other.terms.get(k).copied().unwrap_or_default();
            m = m.max((c - e).norm()).max((d - f).norm());
        }
        for (k, (e, f)) in &other.terms {
            if !self.terms.contains_key(k) {
                m = m.max(e.norm()).max(f.norm());
            }
        }
        m
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms
            .values()
            .map(|(c, d)| c.norm_sqr() + d.norm_sqr())
            .sum()
    }
}

/// Linear combination Σ kᵢ·Aᵢ.
pub fn lin_comb(terms: &[(CoefExpr, ModeExpr)]) -> ModeExpr {
    terms
        .iter()
        .fold(ModeExpr::zero(), |acc, (k, a)| acc.plus(&a.scale(k)))
}

pub fn input_mode(id: &ModeId) -> ModeExpr {
    ModeExpr::input(id)
}

pub fn dagger(a: &ModeExpr) -> ModeExpr {
    a.dagger()
}

pub(crate) fn commutator_hp(ev: &mut Evaluator<'_>, a: &HpMode, b: &HpMode) -> Cx {
    let h = ev.hp();
    let mut acc = h.zero();
    for (id, (c, d)) in a {
        if let Some((e, f)) = b.get(id) {
            let t = h.sub(&h.mul(c, f), &h.mul(d, e));
            acc = h.add(&acc, &t);
        }
    }
    acc
}

/// `[A, B]` as a number, accumulated at working precision before rounding.
pub fn commutator_with(
    ev: &mut Evaluator<'_>,
    a: &ModeExpr,
    b: &ModeExpr,
) -> Result<Complex64, EvalError> {
    let (ha, hb) = (a.eval_hp(ev)?, b.eval_hp(ev)?);
    let z = commutator_hp(ev, &ha, &hb);
    Ok(ev.hp().to_c64(&z))
}

pub fn commutator(a: &ModeExpr, b: &ModeExpr, env: &ParamEnv) -> Result<Complex64, EvalError> {
    commutator_with(&mut Evaluator::new(env), a, b)
}

pub(crate) fn variance_hp(ev: &mut Evaluator<'_>, a: &HpMode, phase: f64) -> f64 {
    let h = ev.hp();
    let rot = h.from_c64(Complex64::from_polar(1.0, -phase));
    let rot_c = h.conj(&rot);
    let mut acc = h.real(0.0);
    for (c, d) in a.values() {
        let t = h.add(&h.mul(&rot, c), &h.mul(&rot_c, &h.conj(d)));
        acc = acc.add(
            &h.norm_sqr(&t),
            h.precision(),
            astro_float::RoundingMode::ToEven,
        );
    }
    crate::hp::to_f64(&acc)
}

pub fn quadrature_variance_with(
    ev: &mut Evaluator<'_>,
    a: &ModeExpr,
    phase: f64,
) -> Result<f64, EvalError> {
    let ha = a.eval_hp(ev)?;
    Ok(variance_hp(ev, &ha, phase))
}

/// Vacuum variance of `X(φ) = e^{−iφ}A + e^{iφ}A†`; a vacuum mode gives 1.
pub fn quadrature_variance(a: &ModeExpr, phase: f64, env: &ParamEnv) -> Result<f64, EvalError> {
    quadrature_variance_with(&mut Evaluator::new(env), a, phase)
}

pub const PROPER_MODE_TOL: f64 = 1e-9;

pub fn overlap_with_ev(
    ev: &mut Evaluator<'_>,
    a: &ModeExpr,
    target: &ModeExpr,
) -> Result<Complex64, EvalError> {
    let n = commutator_with(ev, target, &target.dagger())?;
    if (n - 1.0).norm() > PROPER_MODE_TOL {
        return Err(EvalError::NotProperMode(n.re));
    }
    commutator_with(ev, a, &target.dagger())
}

/// `[A, T†]`, the amplitude of target mode `T` inside `A`.
pub fn overlap_with(
    a: &ModeExpr,
    target: &ModeExpr,
    env: &ParamEnv,
) -> Result<Complex64, EvalError> {
    overlap_with_ev(&mut Evaluator::new(env), a, target)
}

pub fn is_proper_mode(a: &ModeExpr, env: &ParamEnv, tol: f64) -> bool {
    commutator(a, &a.dagger(), env).is_ok_and(|n| (n - 1.0).norm() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(name: &str) -> ModeId {
        ModeId::new(name, ModeKind::Vacuum, name, 0)
    }

    fn squeezed(s: &str) -> (ModeExpr, ModeExpr) {
        let s = CoefExpr::param(s);
        let (e1, e2) = (ModeExpr::input(&id("e1")), ModeExpr::input(&id("e2")));
        let a = lin_comb(&[(s.cosh(), e1.clone()), (s.sinh(), e2.dagger())]);
        let b = lin_comb(&[(s.cosh(), e2), (s.sinh(), e1.dagger())]);
        (a, b)
    }

    #[test]
    fn canonical_commutators() {
        let env = ParamEnv::new();
        let e1 = input_mode(&id("e1"));
        let e2 = input_mode(&id("e2"));
        assert_eq!(
            commutator(&e1, &dagger(&e1), &env).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            commutator(&e1, &dagger(&e2), &env).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn dagger_conjugates() {
        let a = input_mode(&id("e1")).scale(&CoefExpr::i());
        let n = a.dagger().eval(&ParamEnv::new()).unwrap();
        assert_eq!(n.c("e1"), Complex64::new(0.0, 0.0));
        assert_eq!(n.d("e1"), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn bogoliubov_pair() {
        for s in [0.0, 1.0, 5.0, 30.0] {
            let env = ParamEnv::new().with("s", s);
            let (a, b) = squeezed("s");
            let n = commutator(&a, &a.dagger(), &env).unwrap();
            assert!((n - 1.0).norm() < 1e-12);
            assert!(commutator(&a, &b, &env).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn epr_noise_variance() {
        let env = ParamEnv::new().with("s", 2.0);
        let (a, b) = squeezed("s");
        let v = quadrature_variance(&b.minus(&a.dagger()), 0.0, &env).unwrap();
        assert!((v - 2.0 * (-4.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.0366313).abs() < 1e-7);
    }

    #[test]
    fn overlaps() {
        let env = ParamEnv::new().with("eps", 0.25);
        let eps = CoefExpr::param("eps");
        let j0 = input_mode(&id("j"));
        let jp = input_mode(&id("j").perp());
        let jin = lin_comb(&[
            (eps.sqrt(), j0.clone()),
            ((CoefExpr::one() - eps).sqrt(), jp.clone()),
        ]);
        assert!((overlap_with(&jin, &j0, &env).unwrap().re - 0.5).abs() < 1e-15);
        assert_eq!(overlap_with(&jp, &j0, &env).unwrap().norm(), 0.0);
        assert!((overlap_with(&jin, &jin, &env).unwrap().re - 1.0).abs() < 1e-15);
        let twice = j0.scale(&CoefExpr::int(2));
        assert!(!is_proper_mode(&twice, &env, 1e-9));
        assert!(overlap_with(&j0, &twice, &env).is_err());
    }

    #[test]
    fn cancellation_evaluates_to_zero() {
        let a = input_mode(&id("e1"));
        let z = lin_comb(&[(CoefExpr::one(), a.clone()), (-CoefExpr::one(), a)]);
        let n = z.eval(&ParamEnv::new()).unwrap();
        assert_eq!(n.max_abs(), 0.0);
    }
}
