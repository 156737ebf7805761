use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::hp::{Cx, Hp};
use crate::opalg::env::{ParamEnv, ParamValue};
use crate::EvalError;

/// Scalar functions admitted in coefficient expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sqrt,
    Cosh,
    Sinh,
    Tanh,
    Sech,
    Exp,
    Ln,
    Arccosh,
    Conj,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sqrt,
        Func::Cosh,
        Func::Sinh,
        Func::Tanh,
        Func::Sech,
        Func::Exp,
        Func::Ln,
        Func::Arccosh,
        Func::Conj,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Cosh => "cosh",
            Func::Sinh => "sinh",
            Func::Tanh => "tanh",
            Func::Sech => "sech",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Arccosh => "arccosh",
            Func::Conj => "conj",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoefNode {
    /// Non-negative decimal literal, kept verbatim.
    Num(String),
    Param(String),
    I,
    Pi,
    Neg(CoefExpr),
    Add(CoefExpr, CoefExpr),
    Sub(CoefExpr, CoefExpr),
    Mul(CoefExpr, CoefExpr),
    Div(CoefExpr, CoefExpr),
    Call(Func, CoefExpr),
}

/// Immutable, cheaply clonable scalar expression.
///
/// Constructors fold additive and multiplicative identities and pull negation
/// outward, so a printed expression re-parses to the same tree.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefExpr(Arc<CoefNode>);

impl CoefExpr {
    pub fn node(&self) -> &CoefNode {
        &self.0
    }

    fn from_node(n: CoefNode) -> Self {
        CoefExpr(Arc::new(n))
    }

    pub fn zero() -> Self {
        Self::num("0")
    }

    pub fn one() -> Self {
        Self::num("1")
    }

    pub fn int(n: i64) -> Self {
        let e = Self::num(&n.unsigned_abs().to_string());
        if n < 0 {
            -e
        } else {
            e
        }
    }

    /// Decimal literal. A leading minus sign becomes a negation node.
    pub fn num(text: &str) -> Self {
        if let Some(rest) = text.strip_prefix('-') {
            return -Self::num(rest);
        }
        Self::from_node(CoefNode::Num(text.to_string()))
    }

    /// Shortest decimal that round-trips the given float.
    pub fn real(x: f64) -> Self {
        if x == 0.0 {
            return Self::zero();
        }
        let s = format!("{:?}", x.abs());
        let s = s.strip_suffix(".0").unwrap_or(&s).to_string();
        let e = Self::num(&s);
        if x < 0.0 {
            -e
        } else {
            e
        }
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Self::int(p) / Self::int(q)
    }

    pub fn param(name: &str) -> Self {
        Self::from_node(CoefNode::Param(name.to_string()))
    }

    pub fn i() -> Self {
        Self::from_node(CoefNode::I)
    }

    pub fn pi() -> Self {
        Self::from_node(CoefNode::Pi)
    }

    fn literal(&self) -> Option<f64> {
        match self.node() {
            CoefNode::Num(s) => s.parse::<f64>().ok(),
            _ => None,
        }
    }

    /// True only for a literal zero; never evaluates.
    pub fn is_zero(&self) -> bool {
        self.literal() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.literal() == Some(1.0)
    }

    pub fn call(f: Func, arg: CoefExpr) -> Self {
        match (f, arg.node()) {
            (Func::Conj, CoefNode::Num(_) | CoefNode::Pi | CoefNode::Param(_)) => arg,
            (Func::Sqrt, _) if arg.is_zero() || arg.is_one() => arg,
            (Func::Cosh | Func::Sech | Func::Exp, _) if arg.is_zero() => Self::one(),
            (Func::Sinh | Func::Tanh, _) if arg.is_zero() => Self::zero(),
            (Func::Ln | Func::Arccosh, _) if arg.is_one() => Self::zero(),
            _ => Self::from_node(CoefNode::Call(f, arg)),
        }
    }

    pub fn sqrt(&self) -> Self {
        Self::call(Func::Sqrt, self.clone())
    }
    pub fn cosh(&self) -> Self {
        Self::call(Func::Cosh, self.clone())
    }
    pub fn sinh(&self) -> Self {
        Self::call(Func::Sinh, self.clone())
    }
    pub fn tanh(&self) -> Self {
        Self::call(Func::Tanh, self.clone())
    }
    pub fn sech(&self) -> Self {
        Self::call(Func::Sech, self.clone())
    }
    pub fn exp(&self) -> Self {
        Self::call(Func::Exp, self.clone())
    }
    pub fn ln(&self) -> Self {
        Self::call(Func::Ln, self.clone())
    }
    pub fn arccosh(&self) -> Self {
        Self::call(Func::Arccosh, self.clone())
    }
    pub fn conj(&self) -> Self {
        match self.node() {
            CoefNode::I => -Self::i(),
            CoefNode::Neg(a) => -a.conj(),
            CoefNode::Add(a, b) => a.conj() + b.conj(),
            CoefNode::Sub(a, b) => a.conj() - b.conj(),
            CoefNode::Mul(a, b) => a.conj() * b.conj(),
            CoefNode::Div(a, b) => a.conj() / b.conj(),
            CoefNode::Call(Func::Conj, a) => a.clone(),
            CoefNode::Call(
                f @ (Func::Cosh | Func::Sinh | Func::Tanh | Func::Sech | Func::Exp),
                a,
            ) => Self::call(*f, a.conj()),
            _ => Self::call(Func::Conj, self.clone()),
        }
    }

    /// `e^{i x}`.
    pub fn cis(x: &CoefExpr) -> Self {
        if x.is_zero() {
            return Self::one();
        }
        (Self::i() * x.clone()).exp()
    }

    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        self.collect_params(&mut out, &mut seen);
        out.sort();
        out.dedup();
        out
    }

    fn collect_params(&self, out: &mut Vec<String>, seen: &mut HashSet<usize>) {
        if !seen.insert(Arc::as_ptr(&self.0) as usize) {
            return;
        }
        match self.node() {
            CoefNode::Param(p) => out.push(p.clone()),
            CoefNode::Num(_) | CoefNode::I | CoefNode::Pi => {}
            CoefNode::Neg(a) | CoefNode::Call(_, a) => a.collect_params(out, seen),
            CoefNode::Add(a, b)
            | CoefNode::Sub(a, b)
            | CoefNode::Mul(a, b)
            | CoefNode::Div(a, b) => {
                a.collect_params(out, seen);
                b.collect_params(out, seen);
            }
        }
    }

    /// Double-precision evaluation with no memoization, for cross-checks at moderate gains.
    pub fn eval_f64(&self, env: &ParamEnv) -> Result<Complex64, EvalError> {
        eval_f64_inner(self, env, &mut Vec::new())
    }

    fn prec(&self) -> u8 {
        match self.node() {
            CoefNode::Add(..) | CoefNode::Sub(..) => 1,
            CoefNode::Mul(..) | CoefNode::Div(..) => 2,
            CoefNode::Neg(_) => 3,
            _ => 4,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self.node() {
            CoefNode::Num(s) => write!(f, "{s}"),
            CoefNode::Param(p) => write!(f, "{p}"),
            CoefNode::I => write!(f, "i"),
            CoefNode::Pi => write!(f, "pi"),
            CoefNode::Neg(a) => {
                write!(f, "-")?;
                a.fmt_at(f, 2)
            }
            CoefNode::Add(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " + ")?;
                b.fmt_at(f, 2)
            }
            CoefNode::Sub(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " - ")?;
                b.fmt_at(f, 2)
            }
            CoefNode::Mul(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, "*")?;
                b.fmt_at(f, 3)
            }
            CoefNode::Div(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, "/")?;
                b.fmt_at(f, 3)
            }
            CoefNode::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for CoefExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

impl std::ops::Neg for CoefExpr {
    type Output = CoefExpr;
    fn neg(self) -> CoefExpr {
        if self.is_zero() {
            return self;
        }
        match self.node() {
            CoefNode::Neg(a) => a.clone(),
            _ => CoefExpr::from_node(CoefNode::Neg(self)),
        }
    }
}

impl std::ops::Add for CoefExpr {
    type Output = CoefExpr;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: CoefExpr) -> CoefExpr {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        if let CoefNode::Neg(b) = rhs.node() {
            return self - b.clone();
        }
        CoefExpr::from_node(CoefNode::Add(self, rhs))
    }
}

impl std::ops::Sub for CoefExpr {
    type Output = CoefExpr;
    fn sub(self, rhs: CoefExpr) -> CoefExpr {
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return -rhs;
        }
        if let CoefNode::Neg(b) = rhs.node() {
            return self + b.clone();
        }
        CoefExpr::from_node(CoefNode::Sub(self, rhs))
    }
}

impl std::ops::Mul for CoefExpr {
    type Output = CoefExpr;
    fn mul(self, rhs: CoefExpr) -> CoefExpr {
        if self.is_zero() || rhs.is_zero() {
            return CoefExpr::zero();
        }
        if self.is_one() {
            return rhs;
        }
        if rhs.is_one() {
            return self;
        }
        if let CoefNode::Neg(a) = self.node() {
            return -(a.clone() * rhs);
        }
        if let CoefNode::Neg(b) = rhs.node() {
            return -(self * b.clone());
        }
        CoefExpr::from_node(CoefNode::Mul(self, rhs))
    }
}

impl std::ops::Div for CoefExpr {
    type Output = CoefExpr;
    fn div(self, rhs: CoefExpr) -> CoefExpr {
        if self.is_zero() && !rhs.is_zero() {
            return CoefExpr::zero();
        }
        if rhs.is_one() {
            return self;
        }
        if let CoefNode::Neg(a) = self.node() {
            return -(a.clone() / rhs);
        }
        if let CoefNode::Neg(b) = rhs.node() {
            return -(self / b.clone());
        }
        CoefExpr::from_node(CoefNode::Div(self, rhs))
    }
}

impl From<f64> for CoefExpr {
    fn from(x: f64) -> Self {
        CoefExpr::real(x)
    }
}

impl From<i64> for CoefExpr {
    fn from(n: i64) -> Self {
        CoefExpr::int(n)
    }
}

impl From<&str> for CoefExpr {
    fn from(name: &str) -> Self {
        CoefExpr::param(name)
    }
}

fn eval_f64_inner(
    e: &CoefExpr,
    env: &ParamEnv,
    stack: &mut Vec<String>,
) -> Result<Complex64, EvalError> {
    let z = match e.node() {
        CoefNode::Num(s) => Complex64::new(
            s.parse::<f64>()
                .map_err(|_| EvalError::BadLiteral(s.clone()))?,
            0.0,
        ),
        CoefNode::Param(p) => {
            if stack.contains(p) {
                return Err(EvalError::Cycle(p.clone()));
            }
            match env.get(p) {
                None => return Err(EvalError::UnboundParameter(p.clone())),
                Some(ParamValue::Infinity) => Complex64::new(env.limit_scale(), 0.0),
                Some(ParamValue::Value(v)) => {
                    stack.push(p.clone());
                    let r = eval_f64_inner(v, env, stack);
                    stack.pop();
                    let r = r?;
                    if r.im.abs() > 1e-12 * r.re.abs().max(1.0) {
                        return Err(EvalError::ComplexParameter(p.clone()));
                    }
                    Complex64::new(r.re, 0.0)
                }
            }
        }
        CoefNode::I => Complex64::i(),
        CoefNode::Pi => Complex64::new(std::f64::consts::PI, 0.0),
        CoefNode::Neg(a) => -eval_f64_inner(a, env, stack)?,
        CoefNode::Add(a, b) => eval_f64_inner(a, env, stack)? + eval_f64_inner(b, env, stack)?,
        CoefNode::Sub(a, b) => eval_f64_inner(a, env, stack)? - eval_f64_inner(b, env, stack)?,
        CoefNode::Mul(a, b) => eval_f64_inner(a, env, stack)? * eval_f64_inner(b, env, stack)?,
        CoefNode::Div(a, b) => {
            let d = eval_f64_inner(b, env, stack)?;
            if d == Complex64::new(0.0, 0.0) {
                return Err(EvalError::DivisionByZero);
            }
            eval_f64_inner(a, env, stack)? / d
        }
        CoefNode::Call(f, a) => {
            let x = eval_f64_inner(a, env, stack)?;
            match f {
                Func::Sqrt => x.sqrt(),
                Func::Cosh => x.cosh(),
                Func::Sinh => x.sinh(),
                Func::Tanh if x.im == 0.0 => Complex64::new(x.re.tanh(), 0.0),
                Func::Tanh => x.tanh(),
                Func::Sech if x.im == 0.0 => Complex64::new(1.0 / x.re.cosh(), 0.0),
                Func::Sech => {
                    let c = x.cosh();
                    if c == Complex64::new(0.0, 0.0) {
                        return Err(EvalError::DivisionByZero);
                    }
                    1.0 / c
                }
                Func::Exp => x.exp(),
                Func::Ln => {
                    if x == Complex64::new(0.0, 0.0) {
                        return Err(EvalError::Domain("ln(0)".into()));
                    }
                    x.ln()
                }
                Func::Arccosh => {
                    if x.im == 0.0 && x.re >= 1.0 {
                        Complex64::new(x.re.acosh(), 0.0)
                    } else {
                        (x + (x + 1.0).sqrt() * (x - 1.0).sqrt()).ln()
                    }
                }
                Func::Conj => x.conj(),
            }
        }
    };
    Ok(z)
}

/// High-precision evaluator bound to one parameter environment.
///
/// Results are memoized per expression node, so shared subtrees (which
/// dominate circuit-generated coefficients) are evaluated once.
pub struct Evaluator<'e> {
    env: &'e ParamEnv,
    hp: Hp,
    memo: HashMap<usize, (CoefExpr, Cx)>,
    params: HashMap<String, Cx>,
    active: Vec<String>,
}

impl<'e> Evaluator<'e> {
    pub fn new(env: &'e ParamEnv) -> Self {
        Evaluator {
            env,
            hp: Hp::new(env.precision()),
            memo: HashMap::new(),
            params: HashMap::new(),
            active: Vec::new(),
        }
    }

    pub fn env(&self) -> &ParamEnv {
        self.env
    }

    pub fn hp(&mut self) -> &mut Hp {
        &mut self.hp
    }

    pub fn eval_c64(&mut self, e: &CoefExpr) -> Result<Complex64, EvalError> {
        let v = self.eval(e)?;
        Ok(self.hp.to_c64(&v))
    }

    pub fn eval(&mut self, e: &CoefExpr) -> Result<Cx, EvalError> {
        let key = Arc::as_ptr(&e.0) as usize;
        if let Some((_, v)) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let v = self.eval_node(e)?;
        self.memo.insert(key, (e.clone(), v.clone()));
        Ok(v)
    }

    fn param(&mut self, name: &str) -> Result<Cx, EvalError> {
        if let Some(v) = self.params.get(name) {
            return Ok(v.clone());
        }
        if self.active.iter().any(|p| p == name) {
            return Err(EvalError::Cycle(name.to_string()));
        }
        let v = match self.env.get(name) {
            None => return Err(EvalError::UnboundParameter(name.to_string())),
            Some(ParamValue::Infinity) => {
                let l = self.env.limit_scale();
                self.hp
                    .parse_decimal(&format!("{l:?}"))
                    .ok_or(EvalError::BadLiteral(l.to_string()))?
            }
            Some(ParamValue::Value(expr)) => {
                let expr = expr.clone();
                self.active.push(name.to_string());
                let r = self.eval(&expr);
                self.active.pop();
                let r = r?;
                let (re, im) = (crate::hp::to_f64(&r.re).abs(), crate::hp::to_f64(&r.im));
                if im.abs() > 1e-12 * re.max(1.0) {
                    return Err(EvalError::ComplexParameter(name.to_string()));
                }
                Cx {
                    re: r.re,
                    im: self.hp.real(0.0),
                }
            }
        };
        self.params.insert(name.to_string(), v.clone());
        Ok(v)
    }

    fn eval_node(&mut self, e: &CoefExpr) -> Result<Cx, EvalError> {
        Ok(match e.node() {
            CoefNode::Num(s) => self
                .hp
                .parse_decimal(s)
                .ok_or_else(|| EvalError::BadLiteral(s.clone()))?,
            CoefNode::Param(p) => self.param(p)?,
            CoefNode::I => self.hp.i(),
            CoefNode::Pi => self.hp.pi(),
            CoefNode::Neg(a) => {
                let a = self.eval(a)?;
                self.hp.neg(&a)
            }
            CoefNode::Add(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                self.hp.add(&a, &b)
            }
            CoefNode::Sub(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                self.hp.sub(&a, &b)
            }
            CoefNode::Mul(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                self.hp.mul(&a, &b)
            }
            CoefNode::Div(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                self.hp.div(&a, &b).ok_or(EvalError::DivisionByZero)?
            }
            CoefNode::Call(f, a) => {
                let x = self.eval(a)?;
                let hp = &mut self.hp;
                match f {
                    Func::Sqrt => hp.sqrt(&x),
                    Func::Cosh => hp.cosh(&x),
                    Func::Sinh => hp.sinh(&x),
                    Func::Tanh => hp.tanh(&x).ok_or(EvalError::DivisionByZero)?,
                    Func::Sech => hp.sech(&x).ok_or(EvalError::DivisionByZero)?,
                    Func::Exp => hp.exp(&x),
                    Func::Ln => hp.ln(&x).ok_or_else(|| EvalError::Domain("ln(0)".into()))?,
                    Func::Arccosh => hp
                        .arccosh(&x)
                        .ok_or_else(|| EvalError::Domain("arccosh".into()))?,
                    Func::Conj => hp.conj(&x),
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> ParamEnv {
        let mut e = ParamEnv::new();
        e.set("s", 1.0);
        e
    }

    #[test]
    fn identities_fold() {
        let x = CoefExpr::param("x");
        assert_eq!(x.clone() + CoefExpr::zero(), x);
        assert_eq!(CoefExpr::one() * x.clone(), x);
        assert!((CoefExpr::zero() * x.clone()).is_zero());
        assert_eq!(-(-x.clone()), x);
        assert_eq!(CoefExpr::cis(&CoefExpr::zero()), CoefExpr::one());
    }

    #[test]
    fn printing_is_minimal_and_reparsable_shape() {
        let a = CoefExpr::param("a");
        let b = CoefExpr::param("b");
        let c = CoefExpr::param("c");
        assert_eq!(
            (a.clone() - (b.clone() + c.clone())).to_string(),
            "a - (b + c)"
        );
        assert_eq!(
            ((a.clone() + b.clone()) * c.clone()).to_string(),
            "(a + b)*c"
        );
        assert_eq!((a.clone() / (b.clone() * c.clone())).to_string(), "a/(b*c)");
        assert_eq!((-(a.clone() * b.clone())).to_string(), "-a*b");
        assert_eq!((a.clone() + -b.clone()).to_string(), "a - b");
        assert_eq!(CoefExpr::real(-0.25).to_string(), "-0.25");
        assert_eq!(CoefExpr::real(3.0).to_string(), "3");
    }

    #[test]
    fn f64_and_hp_agree() {
        let s = CoefExpr::param("s");
        let e = s.cosh() * s.cosh() - s.sinh() * s.sinh() + CoefExpr::cis(&CoefExpr::pi());
        let env = env();
        let lo = e.eval_f64(&env).unwrap();
        let mut ev = Evaluator::new(&env);
        let hi = ev.eval_c64(&e).unwrap();
        assert!(hi.norm() < 1e-15);
        assert!(lo.norm() < 1e-14);
    }

    #[test]
    fn unbound_and_division_errors() {
        let env = ParamEnv::new();
        let mut ev = Evaluator::new(&env);
        assert_eq!(
            ev.eval(&CoefExpr::param("q")).unwrap_err(),
            EvalError::UnboundParameter("q".into())
        );
        let bad = CoefExpr::one() / (CoefExpr::one() - CoefExpr::one());
        assert_eq!(ev.eval(&bad).unwrap_err(), EvalError::DivisionByZero);
    }

    #[test]
    fn conjugation_distributes() {
        let env = env();
        let z = CoefExpr::cis(&CoefExpr::param("s")) * CoefExpr::i() + CoefExpr::real(0.5);
        let a = z.conj().eval_f64(&env).unwrap();
        let b = z.eval_f64(&env).unwrap().conj();
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn cyclic_parameters_are_reported() {
        let mut env = ParamEnv::new();
        env.set_expr("a", CoefExpr::param("b"));
        env.set_expr("b", CoefExpr::param("a"));
        let mut ev = Evaluator::new(&env);
        assert!(matches!(
            ev.eval(&CoefExpr::param("a")),
            Err(EvalError::Cycle(_))
        ));
    }
}
