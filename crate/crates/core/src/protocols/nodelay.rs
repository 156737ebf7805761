use crate::dsl::Circuit;
use crate::opalg::ModeKind::{EntanglementSeed, Signal};
use crate::output::Side;

use super::builder::{ex, t, td, tp, B};
use super::delayed::{distribute, modes};
use super::{Opts, Overrides};

pub(super) fn independent(_: &Opts, ov: &mut Overrides) -> Circuit {
    let mut b = B::default();
    b.comment("Two independent teleporters, one per bin, recombined by Bob.");
    ov.infinite(&mut b, "s");
    b.mode(EntanglementSeed, "e1", "alice", 0);
    b.mode(EntanglementSeed, "e2", "bob", 0);
    b.mode(EntanglementSeed, "f1", "alice2", 0);
    b.mode(EntanglementSeed, "f2", "bob2", 0);
    b.mode(Signal, "j1", "input", 1);
    b.mode(Signal, "j2", "input", 2);
    b.squeeze(["a0", "b0"], "e1", "e2", ex("s"), ex("0"));
    b.squeeze(["y0", "z0"], "f1", "f2", ex("s"), ex("0"));
    b.homodyne("M1", "j1", "a0", ex("0"));
    b.homodyne("M2", "j2", "y0", ex("0"));
    b.displace("jp1", "b0", "M1", ex("1/sqrt(2)"));
    b.displace("jp2", "z0", "M2", ex("1/sqrt(2)"));
    b.split(["sym", "anti"], "jp1", "jp2", ex("1/2"), ex("-pi/2"));
    b.blank();
    b.output("jp1", "jp1", Side::Perbin);
    b.output("jp2", "jp2", Side::Perbin);
    b.output("sym", "sym", Side::Transmitted);
    b.output("anti", "anti", Side::Transmitted);
    let q = "1/sqrt(2)";
    b.target("sym_mode", vec![t("j1", ex(q)), t("j2", ex(q))]);
    b.expect(
        "jp1",
        vec![t("j1", ex("1")), t("b0", ex("1")), td("a0", ex("-1"))],
    );
    b.expect(
        "jp2",
        vec![t("j2", ex("1")), t("z0", ex("1")), td("y0", ex("-1"))],
    );
    for (port, sg) in [("sym", ""), ("anti", "-")] {
        b.expect(
            port,
            vec![
                t("j1", ex(q)),
                t("j2", ex(&format!("{sg}{q}"))),
                t("b0", ex(q)),
                td("a0", ex(&format!("-{q}"))),
                t("z0", ex(&format!("{sg}{q}"))),
                td("y0", ex(&format!("-{sg}{q}"))),
            ],
        );
    }
    b.expect_perp("sym", vec![tp("b0", ex(q)), tp("z0", ex(q))]);
    b.expect_perp(
        "anti",
        vec![tp("b0", ex(q)), tp("z0", ex(&format!("-{q}")))],
    );
    b.c
}

pub(super) fn telefilter(_: &Opts, ov: &mut Overrides) -> Circuit {
    let mut b = B::default();
    b.comment("Two-bin telefilter with per-bin feed-forward: each bin is displaced as soon");
    b.comment("as it is measured, then Bob recombines the bins.");
    ov.infinite(&mut b, "s");
    ov.value(&mut b, "alpha", "1/2");
    ov.value(&mut b, "phi1", "0");
    ov.value(&mut b, "phi2", "0");
    modes(&mut b);
    distribute(&mut b, "-pi/2");
    b.homodyne("M1", "j1", "am", ex("phi1"));
    b.homodyne("M2", "j2", "ap", ex("phi2"));
    b.displace("jp1", "bm", "M1", ex("exp(-i*phi1)/sqrt(2)"));
    b.displace("jp2", "bp", "M2", ex("exp(-i*phi2)/sqrt(2)"));
    b.split(["sel", "oth"], "jp1", "jp2", ex("alpha"), ex("3*pi/2"));
    b.blank();
    b.output("jp1", "jp1", Side::Perbin);
    b.output("jp2", "jp2", Side::Perbin);
    b.output("selected", "sel", Side::Transmitted);
    b.output("other", "oth", Side::Transmitted);
    let w1 = "exp(-2*i*phi1)";
    let w2 = "exp(-2*i*phi2)";
    b.target(
        "sel_mode",
        vec![
            t("j1", ex(&format!("sqrt(1 - alpha)*{w1}"))),
            t("j2", ex(&format!("sqrt(alpha)*{w2}"))),
        ],
    );
    b.expect(
        "jp1",
        vec![t("j1", ex(w1)), t("bm", ex("1")), td("am", ex("-1"))],
    );
    b.expect(
        "jp2",
        vec![t("j2", ex(w2)), t("bp", ex("1")), td("ap", ex("-1"))],
    );
    b.expect(
        "selected",
        vec![
            t("j1", ex(&format!("sqrt(1 - alpha)*{w1}"))),
            t("j2", ex(&format!("sqrt(alpha)*{w2}"))),
            t("b0", ex("1")),
            td("a0", ex("-1")),
        ],
    );
    b.expect(
        "other",
        vec![
            t("j1", ex(&format!("sqrt(alpha)*{w1}"))),
            t("j2", ex(&format!("-sqrt(1 - alpha)*{w2}"))),
            t("u", ex("1")),
            td("v", ex("-1")),
        ],
    );
    b.expect_perp("selected", vec![tp("b0", ex("1"))]);
    b.expect_perp("other", vec![tp("u", ex("1"))]);
    b.c
}

pub(super) fn telemirror(_: &Opts, ov: &mut Overrides) -> Circuit {
    let mut b = B::default();
    b.comment("Two-bin all-optical telemirror with per-bin channels.");
    ov.infinite(&mut b, "r");
    ov.infinite(&mut b, "s");
    ov.value(&mut b, "alpha", "1/2");
    ov.value(&mut b, "theta_minus", "-pi/2");
    ov.value(&mut b, "theta_plus", "-pi/2");
    modes(&mut b);
    distribute(&mut b, "-pi/2");
    b.squeeze(
        ["c1", "am1"],
        "j1",
        "am",
        ex("r"),
        ex("3*pi/2 - theta_minus"),
    );
    b.squeeze(
        ["c2", "ap1"],
        "j2",
        "ap",
        ex("r"),
        ex("3*pi/2 - theta_plus"),
    );
    b.split(
        ["c1p", "k1"],
        "bm",
        "c1",
        ex("tanh(r)*tanh(r)"),
        ex("theta_minus"),
    );
    b.split(
        ["c2p", "k2"],
        "bp",
        "c2",
        ex("tanh(r)*tanh(r)"),
        ex("theta_plus"),
    );
    b.phase("jp1", "k1", ex("pi"));
    b.phase("jp2", "k2", ex("pi"));
    b.split(["sel", "oth"], "jp1", "jp2", ex("alpha"), ex("3*pi/2"));
    b.unsqueeze(["p1", "q1"], "am1", "c1p", ex("r"));
    b.unsqueeze(["p2", "q2"], "ap1", "c2p", ex("r"));
    b.split(["r3", "r1"], "p1", "p2", ex("1/2"), ex("-pi/2"));
    b.split(["r4", "r2"], "q1", "q2", ex("1/2"), ex("-pi/2"));
    b.blank();
    b.output("jp1", "jp1", Side::Perbin);
    b.output("jp2", "jp2", Side::Perbin);
    b.output("selected", "sel", Side::Transmitted);
    b.output("other", "oth", Side::Transmitted);
    for r in ["r1", "r2", "r3", "r4"] {
        b.output(r, r, Side::Reflected);
    }
    b.target(
        "sel_mode",
        vec![t("j1", ex("sqrt(1 - alpha)")), t("j2", ex("sqrt(alpha)"))],
    );
    b.expect(
        "jp1",
        vec![
            t("j1", ex("1")),
            t("bm", ex("-tanh(r)")),
            td("am", ex("tanh(r)")),
        ],
    );
    b.expect(
        "jp2",
        vec![
            t("j2", ex("1")),
            t("bp", ex("-tanh(r)")),
            td("ap", ex("tanh(r)")),
        ],
    );
    b.expect(
        "selected",
        vec![
            t("j1", ex("sqrt(1 - alpha)")),
            t("j2", ex("sqrt(alpha)")),
            t("b0", ex("-tanh(r)")),
            td("a0", ex("tanh(r)")),
        ],
    );
    b.expect(
        "other",
        vec![
            t("j1", ex("sqrt(alpha)")),
            t("j2", ex("-sqrt(1 - alpha)")),
            t("u", ex("-tanh(r)")),
            td("v", ex("tanh(r)")),
        ],
    );
    let q = "1/(2*sqrt(2))";
    b.expect_limit(
        "r1",
        vec![
            td("j1", ex(q)),
            td("j2", ex(&format!("-{q}"))),
            td("u", ex("-1")),
            t("v", ex("3/2")),
        ],
    );
    b.expect_limit(
        "r2",
        vec![
            t("j1", ex(q)),
            t("j2", ex(&format!("-{q}"))),
            t("u", ex("1")),
            td("v", ex("-1/2")),
        ],
    );
    b.expect_limit(
        "r3",
        vec![
            td("j1", ex(q)),
            td("j2", ex(q)),
            t("a0", ex("3/2")),
            td("b0", ex("-1")),
        ],
    );
    b.expect_limit(
        "r4",
        vec![
            t("j1", ex(q)),
            t("j2", ex(q)),
            td("a0", ex("-1/2")),
            t("b0", ex("1")),
        ],
    );
    let h = "1/sqrt(2)";
    b.expect_limit_perp("selected", vec![tp("b0", ex("-1"))]);
    b.expect_limit_perp("other", vec![tp("u", ex("-1"))]);
    b.expect_limit_perp("r1", vec![tp("v", ex("1"))]);
    b.expect_limit_perp("r2", vec![tp("j1", ex(h)), tp("j2", ex(&format!("-{h}")))]);
    b.expect_limit_perp("r3", vec![tp("a0", ex("1"))]);
    b.expect_limit_perp("r4", vec![tp("j1", ex(h)), tp("j2", ex(h))]);
    b.c
}
