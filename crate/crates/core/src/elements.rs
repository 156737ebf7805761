//! Optical elements as pure maps on mode expressions.
//!
//! Every element acts on a rail's matched component; beamsplitters and phase
//! shifters act identically on the orthogonal component, while squeezers,
//! homodyne channels and displacements leave it on its own rail untouched.

use crate::opalg::{lin_comb, CoefExpr, ModeExpr};

/// The matched mode and its orthogonal complement sharing one spatial rail.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RailState {
    pub zero: ModeExpr,
    pub perp: ModeExpr,
}

impl RailState {
    pub fn new(zero: ModeExpr, perp: ModeExpr) -> Self {
        RailState { zero, perp }
    }

    fn map(&self, f: impl Fn(&ModeExpr) -> ModeExpr) -> Self {
        RailState {
            zero: f(&self.zero),
            perp: f(&self.perp),
        }
    }
}

/// A commuting measurement record fed forward as a classical channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalSignal {
    pub expr: ModeExpr,
    /// The local-oscillator amplitude has been divided out.
    pub beta_normalized: bool,
}

pub fn half() -> CoefExpr {
    CoefExpr::ratio(1, 2)
}

pub fn inv_sqrt2() -> CoefExpr {
    CoefExpr::int(1) / CoefExpr::int(2).sqrt()
}

/// Returns `(minus, plus)`:
/// minus = √α·r − i e^{−iφ}√(1−α)·t, plus = √α·t − i e^{iφ}√(1−α)·r.
pub fn beamsplitter(
    t: &ModeExpr,
    r: &ModeExpr,
    alpha: &CoefExpr,
    phi: &CoefExpr,
) -> (ModeExpr, ModeExpr) {
    let sa = alpha.sqrt();
    let sb = (CoefExpr::one() - alpha.clone()).sqrt();
    let mi = -CoefExpr::i();
    let minus = lin_comb(&[
        (sa.clone(), r.clone()),
        (
            mi.clone() * CoefExpr::cis(&-phi.clone()) * sb.clone(),
            t.clone(),
        ),
    ]);
    let plus = lin_comb(&[(sa, t.clone()), (mi * CoefExpr::cis(phi) * sb, r.clone())]);
    (minus, plus)
}

pub fn apply_beamsplitter(
    t: &RailState,
    r: &RailState,
    alpha: &CoefExpr,
    phi: &CoefExpr,
) -> (RailState, RailState) {
    let (m0, p0) = beamsplitter(&t.zero, &r.zero, alpha, phi);
    let (m1, p1) = beamsplitter(&t.perp, &r.perp, alpha, phi);
    (RailState::new(m0, m1), RailState::new(p0, p1))
}

/// Returns `(sum, diff)` = ((in2 + in1)/√2, (in1 − in2)/√2).
pub fn apply_balanced_bs(in1: &ModeExpr, in2: &ModeExpr) -> (ModeExpr, ModeExpr) {
    let k = inv_sqrt2();
    let sum = lin_comb(&[(k.clone(), in2.clone()), (k.clone(), in1.clone())]);
    let diff = lin_comb(&[(k.clone(), in1.clone()), (-k, in2.clone())]);
    (sum, diff)
}

/// out1 = cosh g·in1 + e^{iθ} sinh g·in2†, out2 = cosh g·in2 + e^{iθ} sinh g·in1†.
pub fn two_mode_squeezer(
    in1: &ModeExpr,
    in2: &ModeExpr,
    gain: &CoefExpr,
    phase: &CoefExpr,
) -> (ModeExpr, ModeExpr) {
    let ch = gain.cosh();
    let sh = CoefExpr::cis(phase) * gain.sinh();
    let out1 = lin_comb(&[(ch.clone(), in1.clone()), (sh.clone(), in2.dagger())]);
    let out2 = lin_comb(&[(ch, in2.clone()), (sh, in1.dagger())]);
    (out1, out2)
}

pub fn apply_two_mode_squeezer(
    in1: &RailState,
    in2: &RailState,
    gain: &CoefExpr,
    phase: &CoefExpr,
) -> (RailState, RailState) {
    let (a, b) = two_mode_squeezer(&in1.zero, &in2.zero, gain, phase);
    (
        RailState::new(a, in1.perp.clone()),
        RailState::new(b, in2.perp.clone()),
    )
}

/// out1 = cosh g·in1 − sinh g·in2†, out2 = cosh g·in2 − sinh g·in1†.
pub fn inverse_squeezer(in1: &ModeExpr, in2: &ModeExpr, gain: &CoefExpr) -> (ModeExpr, ModeExpr) {
    let ch = gain.cosh();
    let sh = -gain.sinh();
    let out1 = lin_comb(&[(ch.clone(), in1.clone()), (sh.clone(), in2.dagger())]);
    let out2 = lin_comb(&[(ch, in2.clone()), (sh, in1.dagger())]);
    (out1, out2)
}

pub fn apply_inverse_squeezer(
    in1: &RailState,
    in2: &RailState,
    gain: &CoefExpr,
) -> (RailState, RailState) {
    let (a, b) = inverse_squeezer(&in1.zero, &in2.zero, gain);
    (
        RailState::new(a, in1.perp.clone()),
        RailState::new(b, in2.perp.clone()),
    )
}

/// The rail's output operator is `e^{iφ}` times its input operator.
pub fn phase_shift(a: &ModeExpr, phi: &CoefExpr) -> ModeExpr {
    a.scale(&CoefExpr::cis(phi))
}

pub fn apply_phase_shift(a: &RailState, phi: &CoefExpr) -> RailState {
    a.map(|m| phase_shift(m, phi))
}

/// `X(φ) = e^{−iφ}A + e^{iφ}A†` as an operator expression.
pub fn quadrature(a: &ModeExpr, phi: &CoefExpr) -> ModeExpr {
    lin_comb(&[
        (CoefExpr::cis(&-phi.clone()), a.clone()),
        (CoefExpr::cis(phi), a.dagger()),
    ])
}

/// Dual homodyne on the balanced mix of `signal` and `resource`.
///
/// The difference port is read at `φx` and the sum port at `φp`, giving
/// M = X_diff(φx) + i·X_sum(φp) = √2(e^{−iφx}·signal − e^{iφx}·resource†)
/// whenever φp = φx + π/2.
pub fn dual_homodyne(
    signal: &ModeExpr,
    resource: &ModeExpr,
    phi_x: &CoefExpr,
    phi_p: &CoefExpr,
) -> ClassicalSignal {
    let (sum, diff) = apply_balanced_bs(signal, resource);
    let expr = lin_comb(&[
        (CoefExpr::one(), quadrature(&diff, phi_x)),
        (CoefExpr::i(), quadrature(&sum, phi_p)),
    ]);
    ClassicalSignal {
        expr,
        beta_normalized: true,
    }
}

/// `resource + ζ·M`.
pub fn displace(resource: &ModeExpr, m: &ClassicalSignal, zeta: &CoefExpr) -> ModeExpr {
    resource.plus(&m.expr.scale(zeta))
}

pub fn apply_displace(resource: &RailState, m: &ClassicalSignal, zeta: &CoefExpr) -> RailState {
    RailState::new(displace(&resource.zero, m, zeta), resource.perp.clone())
}

pub fn classical_combine(signals: &[(CoefExpr, ClassicalSignal)]) -> ClassicalSignal {
    let expr = lin_comb(
        &signals
            .iter()
            .map(|(w, m)| (w.clone(), m.expr.clone()))
            .collect::<Vec<_>>(),
    );
    ClassicalSignal {
        expr,
        beta_normalized: signals.iter().all(|(_, m)| m.beta_normalized),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{commutator, ModeId, ModeKind, NumMode, ParamEnv};
    use num_complex::Complex64;

    fn m(name: &str) -> ModeExpr {
        ModeExpr::input(&ModeId::new(name, ModeKind::Vacuum, name, 0))
    }

    fn num(e: &ModeExpr, env: &ParamEnv) -> NumMode {
        e.eval(env).unwrap()
    }

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a - Complex64::new(re, im)).norm() < 1e-14
    }

    #[test]
    fn beamsplitter_balanced_example() {
        let env = ParamEnv::new();
        let (minus, plus) = beamsplitter(
            &m("a0"),
            &m("v"),
            &CoefExpr::ratio(1, 2),
            &-(CoefExpr::pi() / CoefExpr::int(2)),
        );
        let (mi, pl) = (num(&minus, &env), num(&plus, &env));
        let h = 0.5f64.sqrt();
        assert!(close(mi.c("v"), h, 0.0) && close(mi.c("a0"), h, 0.0));
        assert!(close(pl.c("a0"), h, 0.0) && close(pl.c("v"), -h, 0.0));
    }

    #[test]
    fn beamsplitter_limits() {
        let env = ParamEnv::new();
        let (minus, plus) = beamsplitter(&m("t"), &m("r"), &CoefExpr::one(), &CoefExpr::real(0.3));
        assert!(close(num(&plus, &env).c("t"), 1.0, 0.0));
        assert!(close(num(&minus, &env).c("r"), 1.0, 0.0));
        let (minus, plus) = beamsplitter(&m("t"), &m("r"), &CoefExpr::zero(), &CoefExpr::zero());
        assert!(close(num(&plus, &env).c("r"), 0.0, -1.0));
        assert!(close(num(&minus, &env).c("t"), 0.0, -1.0));
    }

    #[test]
    fn balanced_mix_matches_convention() {
        let env = ParamEnv::new();
        let (sum, diff) = apply_balanced_bs(&m("j"), &m("a"));
        let h = 0.5f64.sqrt();
        assert!(close(num(&sum, &env).c("a"), h, 0.0) && close(num(&sum, &env).c("j"), h, 0.0));
        assert!(close(num(&diff, &env).c("j"), h, 0.0) && close(num(&diff, &env).c("a"), -h, 0.0));
        let (s2, d2) = apply_balanced_bs(&m("a"), &m("a"));
        assert!(close(num(&s2, &env).c("a"), 2f64.sqrt(), 0.0));
        assert_eq!(num(&d2, &env).max_abs(), 0.0);
    }

    #[test]
    fn five_quarters_squeezer() {
        let env = ParamEnv::new();
        let g = CoefExpr::ratio(5, 4).arccosh();
        let (o1, _) = two_mode_squeezer(&m("x"), &m("y"), &g, &CoefExpr::zero());
        let n = num(&o1, &env);
        assert!(close(n.c("x"), 1.25, 0.0) && close(n.d("y"), 0.75, 0.0));
    }

    #[test]
    fn inverse_undoes_squeezer() {
        let env = ParamEnv::new().with("s", 3.0);
        let s = CoefExpr::param("s");
        let (a, b) = two_mode_squeezer(&m("e1"), &m("e2"), &s, &CoefExpr::zero());
        let (x, y) = inverse_squeezer(&a, &b, &s);
        assert!((num(&x, &env).distance(&num(&m("e1"), &env))) < 1e-12);
        assert!((num(&y, &env).distance(&num(&m("e2"), &env))) < 1e-12);
    }

    #[test]
    fn phase_shift_quarter_turn() {
        let env = ParamEnv::new();
        let out = phase_shift(&m("e1"), &(CoefExpr::pi() / CoefExpr::int(2)));
        assert!(close(num(&out, &env).c("e1"), 0.0, 1.0));
    }

    #[test]
    fn homodyne_record_is_classical() {
        let env = ParamEnv::new();
        let sig = dual_homodyne(
            &m("j"),
            &m("a"),
            &CoefExpr::zero(),
            &(CoefExpr::pi() / CoefExpr::int(2)),
        );
        let n = num(&sig.expr, &env);
        assert!(close(n.c("j"), 2f64.sqrt(), 0.0));
        assert!(close(n.d("a"), -(2f64.sqrt()), 0.0));
        assert!(
            commutator(&sig.expr, &sig.expr.dagger(), &env)
                .unwrap()
                .norm()
                < 1e-15
        );
    }

    #[test]
    fn zero_gain_displacement_is_identity() {
        let sig = dual_homodyne(
            &m("j"),
            &m("a"),
            &CoefExpr::zero(),
            &(CoefExpr::pi() / CoefExpr::int(2)),
        );
        assert_eq!(displace(&m("b"), &sig, &CoefExpr::zero()), m("b"));
    }
}
