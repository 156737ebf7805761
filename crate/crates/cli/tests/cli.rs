use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn telesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_telesim"))
        .args(args)
        .env_remove("TELESIM_LIMIT_SCALE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const PROTOCOLS: [&str; 9] = [
    "atemporal_telefilter",
    "atemporal_telemirror",
    "delayed_telefilter",
    "delayed_telemirror",
    "nmode_delayed_telefilter",
    "nmode_nodelay_telefilter",
    "nodelay_independent",
    "nodelay_telefilter",
    "nodelay_telemirror",
];

#[test]
fn build_reproduces_fixtures() {
    for name in PROTOCOLS {
        let o = telesim(&["protocols", "build", name]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        let want = std::fs::read_to_string(fixture(&format!("{name}.tls"))).unwrap();
        assert_eq!(stdout(&o), want, "{name}");
    }
}

#[test]
fn list_names_every_protocol() {
    let o = telesim(&["protocols", "list"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for name in PROTOCOLS {
        assert!(s.lines().any(|l| l == name), "{name}");
    }
}

#[test]
fn verify_passes_on_fixtures() {
    for name in [
        "atemporal_telefilter",
        "delayed_telefilter",
        "nodelay_telemirror",
    ] {
        let f = fixture(&format!("{name}.tls"));
        let o = telesim(&["verify", path(&f)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        assert!(stdout(&o).contains("all checks passed"));
    }
}

#[test]
fn verify_flags_acausal_circuit() {
    let o = telesim(&["verify", path(&fixture("acausal.tls"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("causality: acausal"));
    assert!(stderr(&o).contains("acausal"));
}

#[test]
fn verify_fails_when_an_expectation_breaks() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("wrong.tls");
    let text = std::fs::read_to_string(fixture("atemporal_telefilter.tls"))
        .unwrap()
        .replace("expect out = modes(j=1,", "expect out = modes(j=2,");
    std::fs::write(&f, text).unwrap();
    let o = telesim(&["verify", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("expectation out"), "{}", stderr(&o));
}

#[test]
fn parse_errors_carry_location_and_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.tls");
    std::fs::write(
        &f,
        "param s = 1\nmode signal j rail=in bin=0\nx = phase(q, phi=1)\n",
    )
    .unwrap();
    let o = telesim(&["run", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 3, column 1") && e.contains("`q`"), "{e}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(telesim(&["bogus"]).status.code(), Some(2));
    assert_eq!(
        telesim(&["run", "/nonexistent/file.tls"]).status.code(),
        Some(2)
    );
    let f = fixture("atemporal_telefilter.tls");
    assert_eq!(
        telesim(&["run", path(&f), "--param", "beta=1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        telesim(&["run", path(&f), "--param", "s"]).status.code(),
        Some(2)
    );
    assert_eq!(
        telesim(&["protocols", "build", "nothing"]).status.code(),
        Some(2)
    );
    assert_eq!(
        telesim(&[
            "protocols",
            "build",
            "atemporal_telefilter",
            "--param",
            "gain=huge"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn machine_report_is_deterministic() {
    let f = fixture("delayed_telefilter.tls");
    let a = telesim(&["run", path(&f), "--format", "machine"]);
    let b = telesim(&["run", path(&f), "--format", "machine"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["causality"]["verdict"], "causal");
    assert_eq!(v["causality"]["mandatory_delay"], 1);
    assert_eq!(v["selectivity"]["verdict"], "mode_selective");
    assert_eq!(v["params"]["s"], "infinity");
    let sel = &v["outputs"]["selected"]["zero"];
    assert_eq!(sel["j1"][0].to_string(), "0.707106781187");
}

#[test]
fn selectivity_verdict_is_always_present() {
    for name in PROTOCOLS {
        let f = fixture(&format!("{name}.tls"));
        let o = telesim(&["run", path(&f), "--format", "machine"]);
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(v["selectivity"]["verdict"].is_string(), "{name}");
    }
}

#[test]
fn params_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let f = fixture("atemporal_telefilter.tls");
    let o = telesim(&[
        "run",
        path(&f),
        "--param",
        "s=1",
        "--format",
        "machine",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["params"]["s"], "1");
    assert!(v["limits"].is_null());
    let var = v["variances"]["out"]["x"].as_f64().unwrap();
    assert!((var - (1.0 + 2.0 * (-2.0f64).exp())).abs() < 1e-9, "{var}");
}

#[test]
fn limit_scale_from_environment() {
    let f = fixture("atemporal_telefilter.tls");
    let o = Command::new(env!("CARGO_BIN_EXE_telesim"))
        .args(["run", path(&f), "--format", "machine"])
        .env("TELESIM_LIMIT_SCALE", "10")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["limit_scale"], 10.0);
    let e = v["outputs"]["out"]["zero"]["e2"][0].as_f64().unwrap();
    assert!((e - (-10.0f64).exp()).abs() < 1e-15, "{e}");
}

#[test]
fn limits_command() {
    let f = fixture("atemporal_telemirror.tls");
    let o = telesim(&[
        "limits",
        path(&f),
        "--param",
        "r",
        "--param",
        "s",
        "--format",
        "machine",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["limits"]["ports"]["out"]["converged"], true);
    assert_eq!(v["limits"]["ports"]["out"]["limit"]["j"][0], 1.0);

    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("squeezer.tls");
    std::fs::write(
        &g,
        "param g = 1\nmode vacuum a rail=x bin=0\nmode vacuum b rail=y bin=0\n(c, d) = squeeze(a, b, gain=g)\noutput c = c\n",
    )
    .unwrap();
    let o = telesim(&["limits", g.to_str().unwrap(), "--param", "g"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o)
            .lines()
            .any(|l| l.starts_with("c ") && l.contains(" no ")),
        "{}",
        stdout(&o)
    );
    assert_eq!(
        telesim(&["limits", path(&f), "--param", "zeta"])
            .status
            .code(),
        Some(2)
    );
}
