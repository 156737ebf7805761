use std::path::PathBuf;

use proptest::prelude::*;

use telesim_core::dsl::{evaluate_circuit, parse_circuit, parse_circuit_bytes, serialize, Stmt};
use telesim_core::protocols::{protocol_text, registry};
use telesim_core::ParamEnv;

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name);
    std::fs::read_to_string(p).unwrap()
}

fn corpus() -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = registry()
        .iter()
        .map(|p| (p.name.to_string(), fixture(&format!("{}.tls", p.name))))
        .collect();
    v.push(("acausal".into(), fixture("acausal.tls")));
    v
}

#[test]
fn fixtures_round_trip_byte_identically() {
    for (name, text) in corpus() {
        let c = parse_circuit(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(serialize(&c), text, "{name}");
        evaluate_circuit(&c, &ParamEnv::new()).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn fixtures_match_the_builders() {
    for p in registry() {
        assert_eq!(
            protocol_text(p.name, &[]).unwrap(),
            fixture(&format!("{}.tls", p.name)),
            "{}",
            p.name
        );
    }
}

#[test]
fn invocation_expands_to_the_builder() {
    let c = parse_circuit("protocol delayed_telefilter(alpha=1/3)\n").unwrap();
    let out = evaluate_circuit(&c, &ParamEnv::new()).unwrap();
    let n = out.zero("selected").unwrap().eval(&out.env).unwrap();
    assert!((n.c("j1").re - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
    assert!((n.c("j2").re - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
}

#[test]
fn atemporal_fixture_shape() {
    let c = parse_circuit(&fixture("atemporal_telefilter.tls")).unwrap();
    let count = |f: fn(&Stmt) -> bool| c.iter().filter(|s| f(s)).count();
    assert_eq!(count(|s| matches!(s, Stmt::Squeeze { .. })), 1);
    assert_eq!(count(|s| matches!(s, Stmt::Homodyne { .. })), 1);
    assert_eq!(count(|s| matches!(s, Stmt::Displace { .. })), 1);
    let out = evaluate_circuit(&c, &ParamEnv::new()).unwrap();
    let n = out.zero("out").unwrap().eval(&out.env).unwrap();
    assert!((n.c("j") - 1.0).norm() < 1e-15);
    assert!(n.max_abs_excluding(&["j"]) < 1e-8);
}

#[test]
fn delayed_fixture_per_bin_coefficients() {
    let c = parse_circuit(&fixture("delayed_telefilter.tls")).unwrap();
    let out = evaluate_circuit(&c, &ParamEnv::new()).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (port, su) in [("jp1", h), ("jp2", -h)] {
        let n = out.zero(port).unwrap().eval(&out.env).unwrap();
        assert!((n.c("j1").re - 0.5).abs() < 1e-12);
        assert!((n.c("j2").re - 0.5).abs() < 1e-12);
        assert!((n.c("u").re - su).abs() < 1e-12);
    }
}

#[test]
fn empty_circuit_is_empty_output() {
    let c = parse_circuit("").unwrap();
    let out = evaluate_circuit(&c, &ParamEnv::new()).unwrap();
    assert!(out.ports.is_empty() && out.inputs.is_empty());
}

#[test]
fn undefined_wire_is_located() {
    let e = parse_circuit("mode signal j rail=in bin=0\n\nw = phase(nope, phi=1)\n").unwrap_err();
    assert_eq!((e.pos.line, e.pos.col), (3, 1));
    assert!(e.message.contains("nope"), "{}", e.message);
}

fn mutate(text: &str, ops: &[(usize, u8, u8)]) -> Vec<u8> {
    let mut b = text.as_bytes().to_vec();
    for &(at, kind, byte) in ops {
        if b.is_empty() {
            b.push(byte);
            continue;
        }
        let i = at % b.len();
        match kind % 3 {
            0 => {
                b.remove(i);
            }
            1 => b.insert(i, byte),
            _ => b[i] = byte,
        }
    }
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        if let Err(e) = parse_circuit_bytes(&bytes) {
            prop_assert!(e.pos.line >= 1 && e.pos.col >= 1, "{e:?}");
        }
    }

    #[test]
    fn token_soup_never_panics(words in prop::collection::vec(prop::sample::select(vec![
        "param", "mode", "signal", "vacuum", "=", "(", ")", ",", "x", "y", "split", "squeeze", "homodyne",
        "displace", "combine", "output", "protocol", "infinity", "rail=", "bin=", "1", "-", "*", "/", "pi",
        "i", "\n", "#", "gain=", "alpha=", "modes", "dag", ".perp", "target", "expect", "phase", "1e999",
    ]), 0..60)) {
        let text = words.join(" ");
        if let Err(e) = parse_circuit(&text) {
            prop_assert!(e.pos.line >= 1 && e.pos.col >= 1);
        }
    }

    #[test]
    fn mutated_fixtures_never_panic(
        which in 0..10usize,
        ops in prop::collection::vec((any::<usize>(), any::<u8>(), prop::sample::select(b"(),=*/+-. \nxyz019".to_vec())), 1..4),
    ) {
        let corpus = corpus();
        let (_, text) = &corpus[which % corpus.len()];
        let bytes = mutate(text, &ops);
        match parse_circuit_bytes(&bytes) {
            Ok(c) => {
                let _ = evaluate_circuit(&c, &ParamEnv::new());
            }
            Err(e) => prop_assert!(e.pos.line >= 1 && e.pos.col >= 1),
        }
    }
}
