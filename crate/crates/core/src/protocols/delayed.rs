use crate::dsl::Circuit;
use crate::opalg::ModeKind::{EntanglementSeed, Signal, Vacuum};
use crate::output::Side;

use super::builder::{ex, t, td, tp, B};
use super::{Opts, Overrides};

/// Resource weights of the two distribution ports.
const G1: &str = "-i*exp(-i*phi)*sqrt(1 - alpha)";
const G2: &str = "sqrt(alpha)";
/// Vacuum weights of the two distribution ports.
const H1: &str = "sqrt(alpha)";
const H2: &str = "-i*exp(i*phi)*sqrt(1 - alpha)";

pub(super) fn modes(b: &mut B) {
    b.mode(EntanglementSeed, "e1", "alice", 0);
    b.mode(EntanglementSeed, "e2", "bob", 0);
    b.mode(Vacuum, "v", "alice_aux", 0);
    b.mode(Vacuum, "u", "bob_aux", 0);
    b.mode(Signal, "j1", "input", 1);
    b.mode(Signal, "j2", "input", 2);
}

pub(super) fn distribute(b: &mut B, phi: &str) {
    b.squeeze(["a0", "b0"], "e1", "e2", ex("s"), ex("0"));
    b.split(["am", "ap"], "a0", "v", ex("alpha"), ex(phi));
    b.split(["bm", "bp"], "b0", "u", ex("alpha"), ex(phi));
}

pub(super) fn telefilter(o: &Opts, ov: &mut Overrides) -> Circuit {
    let tanh = o.get("gain") == "tanh";
    let k = if tanh { "*tanh(s)" } else { "" };
    let mut b = B::default();
    b.comment("Two-bin telefilter: each bin is measured against its share of the resource,");
    b.comment("and the combined result displaces both of Bob's shares after the late bin.");
    ov.infinite(&mut b, "s");
    ov.value(&mut b, "alpha", "1/2");
    ov.value(&mut b, "phi", "-pi/2");
    ov.value(&mut b, "phi1", "0");
    ov.value(&mut b, "phi2", "0");
    modes(&mut b);
    distribute(&mut b, "phi");
    b.homodyne("M1", "j1", "am", ex("phi1"));
    b.homodyne("M2", "j2", "ap", ex("phi2"));
    b.combine(
        "M",
        vec![
            (ex(&format!("{G1}*exp(-i*phi1)/2{k}")), "M1".into()),
            (ex(&format!("{G2}*exp(-i*phi2)/2{k}")), "M2".into()),
        ],
    );
    b.displace("jp1", "bm", "M", ex(&format!("sqrt(2)*{G1}")));
    b.displace("jp2", "bp", "M", ex(&format!("sqrt(2)*{G2}")));
    b.split(["sel", "oth"], "jp1", "jp2", ex("alpha"), ex("pi - phi"));
    b.blank();
    b.output("jp1", "jp1", Side::Perbin);
    b.output("jp2", "jp2", Side::Perbin);
    b.output("selected", "sel", Side::Transmitted);
    b.output("other", "oth", Side::Transmitted);
    let s1 = format!("{G1}*exp(-2*i*phi1)");
    let s2 = format!("{G2}*exp(-2*i*phi2)");
    b.target("sel_mode", vec![t("j1", ex(&s1)), t("j2", ex(&s2))]);
    for (port, g, h) in [("jp1", G1, H1), ("jp2", G2, H2)] {
        b.expect(
            port,
            vec![
                t("j1", ex(&format!("{g}*{s1}{k}"))),
                t("j2", ex(&format!("{g}*{s2}{k}"))),
                t("b0", ex(g)),
                td("a0", ex(&format!("-{g}{k}"))),
                t("u", ex(h)),
            ],
        );
    }
    if tanh {
        b.expect(
            "selected",
            vec![
                t("j1", ex(&format!("{s1}*tanh(s)"))),
                t("j2", ex(&format!("{s2}*tanh(s)"))),
                t("e2", ex("sech(s)")),
            ],
        );
    } else {
        b.expect(
            "selected",
            vec![
                t("j1", ex(&s1)),
                t("j2", ex(&s2)),
                t("b0", ex("1")),
                td("a0", ex("-1")),
            ],
        );
    }
    b.expect("other", vec![t("u", ex("1"))]);
    b.expect_perp("selected", vec![tp("b0", ex("1"))]);
    b.expect_perp("other", vec![tp("u", ex("1"))]);
    b.c
}

pub(super) fn telemirror(_: &Opts, ov: &mut Overrides) -> Circuit {
    let mut b = B::default();
    b.comment("Two-bin all-optical telemirror: squeezer channels per bin, mixed and fed to");
    b.comment("Bob's shares through weakly transmitting beamsplitters.");
    ov.infinite(&mut b, "r");
    ov.infinite(&mut b, "s");
    ov.value(&mut b, "alpha", "1/2");
    ov.value(&mut b, "phi", "-pi/2");
    ov.value(&mut b, "t", "arccosh(5/4)");
    ov.value(&mut b, "k", "r + s - t");
    modes(&mut b);
    distribute(&mut b, "phi");
    b.squeeze(["c1", "am1"], "j1", "am", ex("r"), ex("0"));
    b.squeeze(["c2", "ap1"], "j2", "ap", ex("r"), ex("0"));
    b.phase("c1r", "c1", ex("pi/2 - phi"));
    b.phase("am2", "am1", ex("phi"));
    b.split(["cplus", "cminus"], "c1r", "c2", ex("alpha"), ex("pi/2"));
    b.split(
        ["jp1", "cp1"],
        "cplus",
        "bm",
        ex("1 - (1 - alpha)*sech(r)*sech(r)"),
        ex("phi + pi"),
    );
    b.split(
        ["jp2", "cpp"],
        "cp1",
        "bp",
        ex("1 - alpha*sech(r)*sech(r)"),
        ex("pi/2"),
    );
    b.split(["oth", "sel"], "jp2", "jp1", ex("alpha"), ex("phi - pi"));
    b.split(["o1", "o2"], "ap1", "am2", ex("1 - alpha"), ex("0"));
    b.unsqueeze(["r1", "r2"], "o2", "cminus", ex("r"));
    b.phase("o1r", "o1", ex("pi/2"));
    b.unsqueeze(["r3", "r4"], "o1r", "cpp", ex("k"));
    b.blank();
    b.output("jp1", "jp1", Side::Perbin);
    b.output("jp2", "jp2", Side::Perbin);
    b.output("selected", "sel", Side::Transmitted);
    b.output("other", "oth", Side::Transmitted);
    for r in ["r1", "r2", "r3", "r4"] {
        b.output(r, r, Side::Reflected);
    }
    let s1 = "i*exp(-i*phi)*sqrt(1 - alpha)";
    b.target(
        "sel_mode",
        vec![t("j1", ex(s1)), t("j2", ex("-sqrt(alpha)"))],
    );
    b.expect_limit(
        "selected",
        vec![
            t("j1", ex(s1)),
            t("j2", ex("-sqrt(alpha)")),
            t("b0", ex("1")),
            td("a0", ex("-1")),
        ],
    );
    b.expect_limit("other", vec![t("u", ex("1"))]);
    b.expect_limit("r1", vec![t("v", ex("-i*exp(i*phi)"))]);
    b.expect_limit(
        "r2",
        vec![
            t("j1", ex("i*exp(-i*phi)*sqrt(alpha)")),
            t("j2", ex("sqrt(1 - alpha)")),
        ],
    );
    b.expect_limit("r3", vec![t("e1", ex("1"))]);
    b.expect_limit("r4", vec![t("e2", ex("1"))]);
    b.expect_limit_perp("selected", vec![tp("b0", ex("1"))]);
    b.expect_limit_perp("other", vec![tp("u", ex("1"))]);
    b.expect_limit_perp("r1", vec![tp("v", ex("-i*exp(i*phi)"))]);
    b.expect_limit_perp(
        "r2",
        vec![
            tp("j1", ex("i*exp(-i*phi)*sqrt(alpha)")),
            tp("j2", ex("sqrt(1 - alpha)")),
        ],
    );
    b.expect_limit_perp("r3", vec![tp("a0", ex("1"))]);
    b.expect_limit_perp(
        "r4",
        vec![
            tp("j1", ex("-i*exp(-i*phi)*sqrt(1 - alpha)")),
            tp("j2", ex("sqrt(alpha)")),
        ],
    );
    b.c
}
