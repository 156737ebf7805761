//! Report documents for evaluated circuits, in aligned text or canonical JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::dsl::{circuit_env, evaluate_circuit, Circuit, DslError};
use crate::opalg::{quadrature_variance_with, Evaluator, NumMode, ParamEnv};
use crate::output::{ProtocolOutput, Side};
use crate::verify::{
    causality_report, check_bogoliubov, check_expectations, covariance_oracle, limit_coefficients,
    selectivity_report, BogoliubovReport, Causality, DependencyReport, ExpectationCheck,
    OracleError, QuadVariances, SelectivityReport, Verdict, LIMIT_TOL,
};
use crate::EvalError;

pub const TOOL_NAME: &str = "telesim";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Coefficients below this magnitude are left out of printed tables.
pub const DISPLAY_PRUNE: f64 = 1e-14;
/// Significant digits of every float in the machine format.
pub const SIGNIFICANT_DIGITS: usize = 12;
/// Value given to `infinity` parameters when running the covariance oracle.
pub const ORACLE_GAIN: f64 = 1.0;
pub const BOGOLIUBOV_TOL: f64 = 1e-10;
pub const ORACLE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Circuit(#[from] DslError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// `[re c, im c, re d, im d]` per input label.
pub type CoefficientTable = BTreeMap<String, [f64; 4]>;

#[derive(Clone, Debug, Serialize)]
pub struct PortRecord {
    pub side: Side,
    pub bin: u32,
    pub zero: CoefficientTable,
    pub perp: CoefficientTable,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitRecord {
    pub converged: bool,
    pub max_difference: f64,
    pub divergent: Vec<String>,
    pub limit: CoefficientTable,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitSection {
    pub params: Vec<String>,
    pub scale: f64,
    pub tol: f64,
    pub ports: BTreeMap<String, LimitRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleRecord {
    pub params: BTreeMap<String, f64>,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelectivitySection {
    /// Name of the declared target, if the circuit has one.
    pub target: Option<String>,
    pub verdict: Verdict,
    pub report: Option<SelectivityReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub params: BTreeMap<String, String>,
    pub limit_scale: f64,
    pub outputs: BTreeMap<String, PortRecord>,
    pub variances: BTreeMap<String, QuadVariances>,
    pub limits: Option<LimitSection>,
    pub expectations: Vec<ExpectationCheck>,
    pub causality: DependencyReport,
    pub selectivity: SelectivitySection,
    pub bogoliubov: Option<BogoliubovReport>,
    pub oracle: Option<OracleRecord>,
    pub flags: Vec<String>,
}

impl ReportDocument {
    /// Human-readable description of every failed check. Unconverged limits
    /// are reported but do not count: raw channels grow with the gain.
    pub fn failures(&self) -> Vec<String> {
        let mut f = Vec::new();
        for e in self.expectations.iter().filter(|e| !e.pass) {
            f.push(format!(
                "expectation {} off by {:e} (tol {:e})",
                e.key, e.residual, e.tol
            ));
        }
        if self.causality.verdict == Causality::Acausal {
            f.push("circuit is acausal".to_string());
        }
        if let Some(b) = self.bogoliubov.as_ref().filter(|b| !b.pass) {
            f.push(format!("commutators deviate by {:e}", b.max_deviation));
        }
        if let Some(o) = self.oracle.as_ref().filter(|o| !o.pass) {
            f.push(format!(
                "covariance oracle deviates by {:e}",
                o.max_deviation
            ));
        }
        f
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Machine => machine(self),
            Format::Text => text(self),
        }
    }
}

fn pruned(x: f64) -> f64 {
    if x.abs() < DISPLAY_PRUNE {
        0.0
    } else {
        x
    }
}

fn table(n: &NumMode) -> CoefficientTable {
    n.terms
        .iter()
        .map(|(id, (c, d))| (id.label(), [c.re, c.im, d.re, d.im].map(pruned)))
        .filter(|(_, v)| v.iter().any(|x| *x != 0.0))
        .collect()
}

fn limit_section(out: &ProtocolOutput, params: &[String]) -> Result<LimitSection, EvalError> {
    let names: Vec<&str> = params.iter().map(String::as_str).collect();
    let mut ports = BTreeMap::new();
    for (name, p) in out
        .ports
        .iter()
        .filter(|(_, p)| matches!(p.side, Side::Transmitted | Side::Reflected))
    {
        for (key, e) in [
            (name.clone(), &p.state.zero),
            (format!("{name}.perp"), &p.state.perp),
        ] {
            let r = limit_coefficients(e, &names, &out.env, LIMIT_TOL)?;
            ports.insert(
                key,
                LimitRecord {
                    converged: r.converged,
                    max_difference: r.max_difference,
                    divergent: r.divergent,
                    limit: table(&r.limit),
                },
            );
        }
    }
    Ok(LimitSection {
        params: params.to_vec(),
        scale: out.env.limit_scale(),
        tol: LIMIT_TOL,
        ports,
    })
}

/// Oracle and operator variances at `ORACLE_GAIN` for every `infinity` parameter.
fn oracle_record(circuit: &Circuit, user: &ParamEnv) -> Result<OracleRecord, ReportError> {
    let mut env = user.clone();
    let mut params = BTreeMap::new();
    for p in circuit_env(circuit, user)?.infinite_params() {
        env.set(&p, ORACLE_GAIN);
        params.insert(p, ORACLE_GAIN);
    }
    let rec = covariance_oracle(circuit, &env)?;
    let out = evaluate_circuit(circuit, &env)?;
    let mut ev = Evaluator::new(&out.env);
    let mut worst: f64 = 0.0;
    for (name, p) in &out.ports {
        for (key, e) in [
            (name.clone(), &p.state.zero),
            (format!("{name}.perp"), &p.state.perp),
        ] {
            let v = rec.variances[&key];
            let x = quadrature_variance_with(&mut ev, e, 0.0)?;
            let y = quadrature_variance_with(&mut ev, e, std::f64::consts::FRAC_PI_2)?;
            let scale = x.max(y).max(1.0);
            worst = worst
                .max((v.x - x).abs() / scale)
                .max((v.p - y).abs() / scale);
        }
    }
    Ok(OracleRecord {
        params,
        max_deviation: worst,
        tol: ORACLE_TOL,
        pass: worst <= ORACLE_TOL,
    })
}

/// Evaluates `circuit` under `user` and runs the analyses. `full` adds the
/// commutator suite and the covariance oracle.
pub fn analyze(
    circuit: &Circuit,
    user: &ParamEnv,
    full: bool,
) -> Result<ReportDocument, ReportError> {
    let out = evaluate_circuit(circuit, user)?;
    let mut ev = Evaluator::new(&out.env);
    let mut outputs = BTreeMap::new();
    let mut variances = BTreeMap::new();
    for (name, p) in &out.ports {
        outputs.insert(
            name.clone(),
            PortRecord {
                side: p.side,
                bin: p.bin,
                zero: table(&p.state.zero.eval_with(&mut ev)?),
                perp: table(&p.state.perp.eval_with(&mut ev)?),
            },
        );
        for (key, e) in [
            (name.clone(), &p.state.zero),
            (format!("{name}.perp"), &p.state.perp),
        ] {
            let x = quadrature_variance_with(&mut ev, e, 0.0)?;
            let p = quadrature_variance_with(&mut ev, e, std::f64::consts::FRAC_PI_2)?;
            variances.insert(key, QuadVariances { x, p });
        }
    }
    let infinite = out.env.infinite_params();
    let limits = if infinite.is_empty() {
        None
    } else {
        Some(limit_section(&out, &infinite)?)
    };
    let selectivity = match out.targets.iter().next() {
        Some((name, t)) => {
            let r = selectivity_report(&out, t, &ParamEnv::new())?;
            SelectivitySection {
                target: Some(name.clone()),
                verdict: r.verdict,
                report: Some(r),
            }
        }
        None => SelectivitySection {
            target: None,
            verdict: Verdict::Neither,
            report: None,
        },
    };
    let (bogoliubov, oracle) = if full {
        let set = out.full_output_set();
        (
            Some(check_bogoliubov(&set, &out.env, BOGOLIUBOV_TOL)?),
            Some(oracle_record(circuit, user)?),
        )
    } else {
        (None, None)
    };
    Ok(ReportDocument {
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        params: out
            .env
            .iter()
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect(),
        limit_scale: out.env.limit_scale(),
        outputs,
        variances,
        limits,
        expectations: check_expectations(&out, LIMIT_TOL)?,
        causality: causality_report(&out)?,
        selectivity,
        bogoliubov,
        oracle,
        flags: out.flags.clone(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitsDocument {
    pub tool: String,
    pub version: String,
    pub limits: LimitSection,
}

impl LimitsDocument {
    pub fn passed(&self) -> bool {
        self.limits.ports.values().all(|r| r.converged)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Machine => machine(self),
            Format::Text => {
                let mut s = String::new();
                limits_text(&mut s, &self.limits);
                s
            }
        }
    }
}

/// Limit of every transmitted and reflected port as `params` go to infinity.
pub fn limits(
    circuit: &Circuit,
    user: &ParamEnv,
    params: &[String],
) -> Result<LimitsDocument, ReportError> {
    let out = evaluate_circuit(circuit, user)?;
    for p in params {
        if !out.env.contains(p) {
            return Err(ReportError::Eval(EvalError::UnboundParameter(p.clone())));
        }
    }
    Ok(LimitsDocument {
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        limits: limit_section(&out, params)?,
    })
}

/// Rounds to `SIGNIFICANT_DIGITS` and maps `-0` to `0`.
pub fn canonical_float(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = canonical_float(n.as_f64().unwrap_or_default());
            serde_json::Number::from_f64(x)
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        v => v,
    }
}

/// Canonical JSON: sorted keys, 12 significant digits, no negative zero.
pub fn machine<T: Serialize>(doc: &T) -> String {
    let v = serde_json::to_value(doc).expect("report documents serialize");
    let mut s = serde_json::to_string_pretty(&canonical(v)).expect("values serialize");
    s.push('\n');
    s
}

fn num(x: f64) -> String {
    let x = canonical_float(x);
    if x.is_finite() && x.abs() >= 1e-4 && x.abs() < 1e6 || x == 0.0 {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn complex(re: f64, im: f64) -> String {
    let z = Complex64::new(canonical_float(re), canonical_float(im));
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => num(z.re),
        (true, false) => format!("{}i", num(z.im)),
        _ => format!(
            "{}{}{}i",
            num(z.re),
            if z.im < 0.0 { "-" } else { "+" },
            num(z.im.abs())
        ),
    }
}

fn aligned(out: &mut String, rows: &[Vec<String>]) {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    for r in rows {
        let mut line = String::new();
        for (c, cell) in r.iter().enumerate() {
            if c + 1 == r.len() {
                line.push_str(cell);
            } else {
                let _ = write!(line, "{cell:<w$}  ", w = widths[c]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
}

fn table_rows(key: &str, t: &CoefficientTable, rows: &mut Vec<Vec<String>>) {
    if t.is_empty() {
        rows.push(vec![key.to_string(), "-".into(), "0".into(), "0".into()]);
    }
    for (i, (label, [a, b, c, d])) in t.iter().enumerate() {
        let k = if i == 0 {
            key.to_string()
        } else {
            String::new()
        };
        rows.push(vec![k, label.clone(), complex(*a, *b), complex(*c, *d)]);
    }
}

fn limits_text(s: &mut String, l: &LimitSection) {
    let _ = writeln!(
        s,
        "limits ({} -> infinity, L = {}, tol {}):",
        l.params.join(", "),
        num(l.scale),
        num(l.tol)
    );
    let mut rows = vec![vec![
        "port".into(),
        "converged".into(),
        "difference".into(),
        "divergent".into(),
    ]];
    for (k, r) in &l.ports {
        rows.push(vec![
            k.clone(),
            if r.converged { "yes" } else { "no" }.into(),
            num(r.max_difference),
            r.divergent.join(" "),
        ]);
    }
    aligned(s, &rows);
    let mut rows = vec![vec!["port".into(), "mode".into(), "c".into(), "d".into()]];
    for (k, r) in &l.ports {
        table_rows(k, &r.limit, &mut rows);
    }
    s.push_str("limit coefficients:\n");
    aligned(s, &rows);
}

fn text(d: &ReportDocument) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", d.tool, d.version);
    let params: Vec<String> = d.params.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    let _ = writeln!(
        s,
        "params: {}",
        if params.is_empty() {
            "none".into()
        } else {
            params.join(", ")
        }
    );
    let _ = writeln!(s, "limit scale: {}", num(d.limit_scale));
    s.push('\n');

    let mut rows = vec![vec![
        "port".into(),
        "side".into(),
        "bin".into(),
        "mode".into(),
        "c".into(),
        "d".into(),
    ]];
    for (name, p) in &d.outputs {
        for (key, t) in [(name.clone(), &p.zero), (format!("{name}.perp"), &p.perp)] {
            let mut sub = Vec::new();
            table_rows(&key, t, &mut sub);
            for (i, r) in sub.into_iter().enumerate() {
                let (side, bin) = if i == 0 {
                    (p.side.keyword().to_string(), p.bin.to_string())
                } else {
                    (String::new(), String::new())
                };
                rows.push(vec![
                    r[0].clone(),
                    side,
                    bin,
                    r[1].clone(),
                    r[2].clone(),
                    r[3].clone(),
                ]);
            }
        }
    }
    s.push_str("outputs:\n");
    aligned(&mut s, &rows);
    s.push('\n');

    let mut rows = vec![vec!["port".into(), "var X".into(), "var P".into()]];
    for (k, v) in &d.variances {
        rows.push(vec![k.clone(), num(v.x), num(v.p)]);
    }
    s.push_str("variances:\n");
    aligned(&mut s, &rows);
    s.push('\n');

    if let Some(l) = &d.limits {
        limits_text(&mut s, l);
        s.push('\n');
    }

    if !d.expectations.is_empty() {
        let mut rows = vec![vec![
            "expectation".into(),
            "kind".into(),
            "residual".into(),
            "result".into(),
        ]];
        for e in &d.expectations {
            rows.push(vec![
                e.key.clone(),
                if e.limit { "limit" } else { "exact" }.into(),
                num(e.residual),
                if e.pass { "pass" } else { "FAIL" }.into(),
            ]);
        }
        s.push_str("expectations:\n");
        aligned(&mut s, &rows);
        s.push('\n');
    }

    let c = &d.causality;
    let verdict = match c.verdict {
        Causality::Causal => "causal",
        Causality::Acausal => "acausal",
    };
    let _ = writeln!(
        s,
        "causality: {verdict}, mandatory delay {} bin(s), lower triangular {}",
        c.mandatory_delay,
        if c.lower_triangular { "yes" } else { "no" }
    );
    let mut rows = vec![vec![
        "port".into(),
        "emission".into(),
        "latest input".into(),
        "inputs".into(),
    ]];
    for (k, o) in &c.outputs {
        let deps: Vec<String> = o
            .dependencies
            .iter()
            .map(|(l, b)| format!("{l}@{b}"))
            .collect();
        rows.push(vec![
            k.clone(),
            o.earliest_emission_bin.to_string(),
            o.latest_dependency_bin.to_string(),
            deps.join(" "),
        ]);
    }
    aligned(&mut s, &rows);
    s.push('\n');

    let sel = &d.selectivity;
    let _ = writeln!(
        s,
        "selectivity: {} (target {})",
        sel.verdict.as_str(),
        sel.target.as_deref().unwrap_or("none")
    );
    if let Some(r) = &sel.report {
        let mut rows = vec![vec![
            "port".into(),
            "overlap".into(),
            "leakage".into(),
            "excess noise".into(),
        ]];
        for (k, p) in &r.ports {
            rows.push(vec![
                k.clone(),
                complex(p.target_overlap.re, p.target_overlap.im),
                num(p.orthogonal_leakage),
                num(p.noise_variance_excess),
            ]);
        }
        aligned(&mut s, &rows);
    }

    if let Some(b) = &d.bogoliubov {
        s.push('\n');
        let _ = writeln!(
            s,
            "commutators: {} over {} modes, max deviation {}",
            if b.pass { "pass" } else { "FAIL" },
            b.modes,
            num(b.max_deviation)
        );
    }
    if let Some(o) = &d.oracle {
        let at: Vec<String> = o
            .params
            .iter()
            .map(|(k, v)| format!("{k} = {}", num(*v)))
            .collect();
        let _ = writeln!(
            s,
            "covariance oracle: {}, max relative deviation {}{}",
            if o.pass { "pass" } else { "FAIL" },
            num(o.max_deviation),
            if at.is_empty() {
                String::new()
            } else {
                format!(" at {}", at.join(", "))
            }
        );
    }
    for f in &d.flags {
        let _ = writeln!(s, "note: {f}");
    }
    let failures = d.failures();
    s.push('\n');
    if failures.is_empty() {
        s.push_str("all checks passed\n");
    } else {
        for f in failures {
            let _ = writeln!(s, "FAIL: {f}");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{lookup, Overrides};

    fn circuit(name: &str) -> Circuit {
        let p = lookup(name).unwrap();
        p.circuit(&p.default_opts(), Overrides::new()).unwrap()
    }

    #[test]
    fn machine_output_is_byte_stable() {
        let c = circuit("delayed_telefilter");
        let a = analyze(&c, &ParamEnv::new(), false)
            .unwrap()
            .render(Format::Machine);
        let b = analyze(&c, &ParamEnv::new(), false)
            .unwrap()
            .render(Format::Machine);
        assert_eq!(a, b);
        assert!(!a.contains("-0.0,") && !a.contains("-0.0\n"));
    }

    #[test]
    fn delayed_telefilter_reports_one_bin_of_delay() {
        let d = analyze(&circuit("delayed_telefilter"), &ParamEnv::new(), false).unwrap();
        let v: Value = serde_json::from_str(&d.render(Format::Machine)).unwrap();
        assert_eq!(v["causality"]["verdict"], "causal");
        assert_eq!(v["causality"]["mandatory_delay"], 1);
        assert_eq!(v["selectivity"]["verdict"], "mode_selective");
    }

    #[test]
    fn canonical_floats() {
        assert_eq!(canonical_float(-0.0).to_bits(), 0.0f64.to_bits());
        assert_eq!(canonical_float(0.1 + 0.2), 0.3);
        assert_eq!(canonical_float(1.0 / 3.0), 0.333333333333);
        assert_eq!(canonical_float(-1e-300), -1e-300);
    }

    #[test]
    fn text_report_lists_every_section() {
        let d = analyze(&circuit("atemporal_telefilter"), &ParamEnv::new(), true).unwrap();
        let t = d.render(Format::Text);
        for s in [
            "outputs:",
            "variances:",
            "limits",
            "expectations:",
            "causality: causal",
            "selectivity: mode_selective",
            "commutators: pass",
            "covariance oracle: pass",
        ] {
            assert!(t.contains(s), "{s}\n{t}");
        }
        assert!(d.passed(), "{:?}", d.failures());
    }

    #[test]
    fn every_default_protocol_verifies() {
        for p in crate::protocols::registry() {
            let c = p.circuit(&p.default_opts(), Overrides::new()).unwrap();
            let d = analyze(&c, &ParamEnv::new(), true).unwrap();
            assert!(d.passed(), "{}: {:?}", p.name, d.failures());
        }
    }
}
