use std::collections::BTreeMap;

use crate::hp::DEFAULT_PRECISION;
use crate::opalg::coef::CoefExpr;

pub const DEFAULT_LIMIT_SCALE: f64 = 20.0;

#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Value(CoefExpr),
    /// Stands for the `→ ∞` limit; evaluates to the environment's limit scale.
    Infinity,
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Value(e) => write!(f, "{e}"),
            ParamValue::Infinity => write!(f, "infinity"),
        }
    }
}

/// Parameter bindings plus the numeric settings used to evaluate them.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamEnv {
    values: BTreeMap<String, ParamValue>,
    limit_scale: f64,
    precision: usize,
}

impl Default for ParamEnv {
    fn default() -> Self {
        Self::new()
    }
}

impl ParamEnv {
    pub fn new() -> Self {
        ParamEnv {
            values: BTreeMap::new(),
            limit_scale: DEFAULT_LIMIT_SCALE,
            precision: DEFAULT_PRECISION,
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn with_infinity(mut self, name: &str) -> Self {
        self.set_infinity(name);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.set_expr(name, CoefExpr::real(value));
    }

    pub fn set_expr(&mut self, name: &str, value: CoefExpr) {
        self.values
            .insert(name.to_string(), ParamValue::Value(value));
    }

    pub fn set_infinity(&mut self, name: &str) {
        self.values.insert(name.to_string(), ParamValue::Infinity);
    }

    pub fn set_value(&mut self, name: &str, value: ParamValue) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.values.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ParamValue)> {
        self.values.iter()
    }

    pub fn infinite_params(&self) -> Vec<String> {
        self.values
            .iter()
            .filter(|(_, v)| matches!(v, ParamValue::Infinity))
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn limit_scale(&self) -> f64 {
        self.limit_scale
    }

    pub fn set_limit_scale(&mut self, l: f64) {
        self.limit_scale = l;
    }

    pub fn with_limit_scale(mut self, l: f64) -> Self {
        self.limit_scale = l;
        self
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn set_precision(&mut self, bits: usize) {
        self.precision = bits;
    }

    /// Bindings from `other` take precedence; numeric settings come from `other`.
    pub fn overlay(&self, other: &ParamEnv) -> ParamEnv {
        let mut out = self.clone();
        for (k, v) in &other.values {
            out.values.insert(k.clone(), v.clone());
        }
        out.limit_scale = other.limit_scale;
        out.precision = other.precision;
        out
    }
}
