//! Arbitrary-precision real and complex arithmetic used for coefficient evaluation.
//!
//! Reflected-mode chains at large squeezing cancel terms many orders of magnitude
//! larger than their result, so every coefficient is computed at `prec` bits and
//! rounded to `f64` only when reported.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_complex::Complex64;

const RM: RoundingMode = RoundingMode::ToEven;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: usize = 512;

/// Complex number with arbitrary-precision parts.
#[derive(Clone, Debug)]
pub struct Cx {
    pub re: BigFloat,
    pub im: BigFloat,
}

/// Precision context: working precision plus the cached constants astro-float needs.
pub struct Hp {
    prec: usize,
    cc: Consts,
}

impl std::fmt::Debug for Hp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hp").field("prec", &self.prec).finish()
    }
}

impl Hp {
    pub fn new(prec: usize) -> Self {
        let prec = prec.max(64);
        Hp {
            prec,
            cc: Consts::new().expect("astro-float constants cache"),
        }
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn real(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.prec)
    }

    pub fn zero(&self) -> Cx {
        Cx {
            re: self.real(0.0),
            im: self.real(0.0),
        }
    }

    pub fn one(&self) -> Cx {
        self.from_f64(1.0)
    }

    pub fn i(&self) -> Cx {
        Cx {
            re: self.real(0.0),
            im: self.real(1.0),
        }
    }

    pub fn from_f64(&self, x: f64) -> Cx {
        Cx {
            re: self.real(x),
            im: self.real(0.0),
        }
    }

    pub fn from_c64(&self, z: Complex64) -> Cx {
        Cx {
            re: self.real(z.re),
            im: self.real(z.im),
        }
    }

    /// Parses a decimal literal such as `0.25` or `1e-3` exactly to working precision.
    pub fn parse_decimal(&mut self, text: &str) -> Option<Cx> {
        let v = BigFloat::parse(text, Radix::Dec, self.prec, RM, &mut self.cc);
        if v.is_nan() || v.is_inf() {
            return None;
        }
        Some(Cx {
            re: v,
            im: self.real(0.0),
        })
    }

    pub fn pi(&mut self) -> Cx {
        Cx {
            re: self.cc.pi(self.prec, RM),
            im: self.real(0.0),
        }
    }

    pub fn add(&self, a: &Cx, b: &Cx) -> Cx {
        Cx {
            re: a.re.add(&b.re, self.prec, RM),
            im: a.im.add(&b.im, self.prec, RM),
        }
    }

    pub fn sub(&self, a: &Cx, b: &Cx) -> Cx {
        Cx {
            re: a.re.sub(&b.re, self.prec, RM),
            im: a.im.sub(&b.im, self.prec, RM),
        }
    }

    pub fn neg(&self, a: &Cx) -> Cx {
        Cx {
            re: a.re.neg(),
            im: a.im.neg(),
        }
    }

    pub fn conj(&self, a: &Cx) -> Cx {
        Cx {
            re: a.re.clone(),
            im: a.im.neg(),
        }
    }

    pub fn mul(&self, a: &Cx, b: &Cx) -> Cx {
        let p = self.prec;
        if a.im.is_zero() && b.im.is_zero() {
            return Cx {
                re: a.re.mul(&b.re, p, RM),
                im: self.real(0.0),
            };
        }
        let rr = a.re.mul(&b.re, p, RM);
        let ii = a.im.mul(&b.im, p, RM);
        let ri = a.re.mul(&b.im, p, RM);
        let ir = a.im.mul(&b.re, p, RM);
        Cx {
            re: rr.sub(&ii, p, RM),
            im: ri.add(&ir, p, RM),
        }
    }

    /// Returns `None` on division by zero.
    pub fn div(&self, a: &Cx, b: &Cx) -> Option<Cx> {
        let p = self.prec;
        if b.re.is_zero() && b.im.is_zero() {
            return None;
        }
        if b.im.is_zero() {
            return Some(Cx {
                re: a.re.div(&b.re, p, RM),
                im: a.im.div(&b.re, p, RM),
            });
        }
        let den = self.norm_sqr(b);
        let num = self.mul(a, &self.conj(b));
        Some(Cx {
            re: num.re.div(&den, p, RM),
            im: num.im.div(&den, p, RM),
        })
    }

    pub fn scale(&self, a: &Cx, k: &BigFloat) -> Cx {
        Cx {
            re: a.re.mul(k, self.prec, RM),
            im: a.im.mul(k, self.prec, RM),
        }
    }

    pub fn norm_sqr(&self, a: &Cx) -> BigFloat {
        let p = self.prec;
        a.re.mul(&a.re, p, RM).add(&a.im.mul(&a.im, p, RM), p, RM)
    }

    pub fn abs(&self, a: &Cx) -> BigFloat {
        if a.im.is_zero() {
            return a.re.abs();
        }
        self.norm_sqr(a).sqrt(self.prec, RM)
    }

    pub fn is_real(a: &Cx) -> bool {
        a.im.is_zero()
    }

    fn real_exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(self.prec, RM, &mut self.cc)
    }

    /// `e^{i y}` for real `y`.
    fn cis(&mut self, y: &BigFloat) -> Cx {
        let p = self.prec;
        Cx {
            re: y.cos(p, RM, &mut self.cc),
            im: y.sin(p, RM, &mut self.cc),
        }
    }

    pub fn exp(&mut self, a: &Cx) -> Cx {
        let m = self.real_exp(&a.re);
        if a.im.is_zero() {
            return Cx {
                re: m,
                im: self.real(0.0),
            };
        }
        let c = self.cis(&a.im);
        self.scale(&c, &m)
    }

    fn atan2(&mut self, y: &BigFloat, x: &BigFloat) -> BigFloat {
        let p = self.prec;
        let pi = self.cc.pi(p, RM);
        if x.is_zero() {
            let half = pi.div(&self.real(2.0), p, RM);
            return if y.is_negative() { half.neg() } else { half };
        }
        let base = y.div(x, p, RM).atan(p, RM, &mut self.cc);
        if x.is_positive() {
            base
        } else if y.is_negative() {
            base.sub(&pi, p, RM)
        } else {
            base.add(&pi, p, RM)
        }
    }

    /// Principal logarithm. `None` at zero.
    pub fn ln(&mut self, a: &Cx) -> Option<Cx> {
        let p = self.prec;
        if a.re.is_zero() && a.im.is_zero() {
            return None;
        }
        if a.im.is_zero() && a.re.is_positive() {
            return Some(Cx {
                re: a.re.ln(p, RM, &mut self.cc),
                im: self.real(0.0),
            });
        }
        let r = self.abs(a);
        Some(Cx {
            re: r.ln(p, RM, &mut self.cc),
            im: self.atan2(&a.im, &a.re),
        })
    }

    /// Principal square root.
    pub fn sqrt(&self, a: &Cx) -> Cx {
        let p = self.prec;
        if a.im.is_zero() {
            if a.re.is_negative() {
                return Cx {
                    re: self.real(0.0),
                    im: a.re.neg().sqrt(p, RM),
                };
            }
            return Cx {
                re: a.re.sqrt(p, RM),
                im: self.real(0.0),
            };
        }
        let two = self.real(2.0);
        let r = self.abs(a);
        let re = r.add(&a.re, p, RM).div(&two, p, RM).sqrt(p, RM);
        let mut im = r.sub(&a.re, p, RM).div(&two, p, RM).sqrt(p, RM);
        if a.im.is_negative() {
            im = im.neg();
        }
        Cx { re, im }
    }

    pub fn cosh(&mut self, a: &Cx) -> Cx {
        if a.im.is_zero() {
            return Cx {
                re: a.re.cosh(self.prec, RM, &mut self.cc),
                im: self.real(0.0),
            };
        }
        let e = self.exp(a);
        let em = self.exp(&self.neg(a));
        let half = self.real(0.5);
        self.scale(&self.add(&e, &em), &half)
    }

    pub fn sinh(&mut self, a: &Cx) -> Cx {
        if a.im.is_zero() {
            return Cx {
                re: a.re.sinh(self.prec, RM, &mut self.cc),
                im: self.real(0.0),
            };
        }
        let e = self.exp(a);
        let em = self.exp(&self.neg(a));
        let half = self.real(0.5);
        self.scale(&self.sub(&e, &em), &half)
    }

    pub fn tanh(&mut self, a: &Cx) -> Option<Cx> {
        if a.im.is_zero() {
            return Some(Cx {
                re: a.re.tanh(self.prec, RM, &mut self.cc),
                im: self.real(0.0),
            });
        }
        let s = self.sinh(a);
        let c = self.cosh(a);
        self.div(&s, &c)
    }

    pub fn sech(&mut self, a: &Cx) -> Option<Cx> {
        let c = self.cosh(a);
        self.div(&self.one(), &c)
    }

    pub fn arccosh(&mut self, a: &Cx) -> Option<Cx> {
        let p = self.prec;
        if a.im.is_zero() && a.re.cmp(&self.real(1.0)).is_some_and(|c| c >= 0) {
            return Some(Cx {
                re: a.re.acosh(p, RM, &mut self.cc),
                im: self.real(0.0),
            });
        }
        let one = self.one();
        let s1 = self.sqrt(&self.add(a, &one));
        let s2 = self.sqrt(&self.sub(a, &one));
        let arg = self.add(a, &self.mul(&s1, &s2));
        self.ln(&arg)
    }

    pub fn to_c64(&self, a: &Cx) -> Complex64 {
        Complex64::new(to_f64(&a.re), to_f64(&a.im))
    }

    pub fn abs_f64(&self, a: &Cx) -> f64 {
        to_f64(&self.abs(a))
    }
}

/// Rounds a big float to the nearest `f64` (saturating to infinity on overflow).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _, sign, exp, _)) = x.as_raw_parts() else {
        return 0.0;
    };
    if x.is_zero() || words.is_empty() {
        return 0.0;
    }
    let n = words.len();
    let hi = words[n - 1] as u128;
    let lo = if n > 1 { words[n - 2] as u128 } else { 0 };
    let sticky = words[..n.saturating_sub(2)].iter().any(|&w| w != 0);
    let mant = (hi << 64) | lo | sticky as u128;
    // value = mant * 2^(exp - 128)
    let v = scale_pow2(mant as f64, exp as i64 - 128);
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

fn scale_pow2(mut v: f64, mut k: i64) -> f64 {
    while k > 1000 {
        v *= 2f64.powi(1000);
        k -= 1000;
        if v.is_infinite() {
            return v;
        }
    }
    while k < -1000 {
        v *= 2f64.powi(-1000);
        k += 1000;
        if v == 0.0 {
            return v;
        }
    }
    v * 2f64.powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trip() {
        let hp = Hp::new(256);
        for x in [
            0.0,
            1.0,
            -2.5,
            1e-300,
            3.0e300,
            0.1,
            std::f64::consts::PI,
            -7.25e-12,
        ] {
            assert_eq!(to_f64(&hp.real(x)), x);
        }
    }

    #[test]
    fn hyperbolic_identity_survives_large_arguments() {
        let mut hp = Hp::new(512);
        let x = hp.from_f64(40.0);
        let c = hp.cosh(&x);
        let s = hp.sinh(&x);
        let d = hp.sub(&hp.mul(&c, &c), &hp.mul(&s, &s));
        assert!((hp.to_c64(&d).re - 1.0).abs() < 1e-30);
    }

    #[test]
    fn complex_exp_and_log() {
        let mut hp = Hp::new(256);
        let z = hp.from_c64(Complex64::new(0.3, -1.2));
        let e = hp.exp(&z);
        let back = hp.ln(&e).unwrap();
        let b = hp.to_c64(&back);
        assert!((b.re - 0.3).abs() < 1e-15 && (b.im + 1.2).abs() < 1e-15);
        let pi = hp.pi();
        let ipi = hp.mul(&hp.i(), &pi);
        let e = hp.exp(&ipi);
        let m1 = hp.to_c64(&e);
        assert!((m1.re + 1.0).abs() < 1e-15 && m1.im.abs() < 1e-15);
    }

    #[test]
    fn sqrt_branches() {
        let hp = Hp::new(128);
        let r = hp.to_c64(&hp.sqrt(&hp.from_f64(-4.0)));
        assert_eq!(r, Complex64::new(0.0, 2.0));
        let z = hp.from_c64(Complex64::new(3.0, -4.0));
        let s = hp.to_c64(&hp.sqrt(&z));
        assert!((s - Complex64::new(2.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn arccosh_of_five_quarters() {
        let mut hp = Hp::new(256);
        let x = hp.from_f64(1.25);
        let t = hp.arccosh(&x).unwrap();
        assert!((hp.to_c64(&t).re - 2f64.ln()).abs() < 1e-15);
        let ch = hp.cosh(&t);
        let c = hp.to_c64(&ch);
        assert!((c.re - 1.25).abs() < 1e-15);
    }

    #[test]
    fn decimal_literals_are_exact_to_precision() {
        let mut hp = Hp::new(256);
        let a = hp.parse_decimal("0.1").unwrap();
        let ten = hp.from_f64(10.0);
        let one = hp.mul(&a, &ten);
        let d = hp.sub(&one, &hp.one());
        assert!(hp.abs_f64(&d) < 1e-70);
        assert!(hp.parse_decimal("abc").is_none());
    }
}
