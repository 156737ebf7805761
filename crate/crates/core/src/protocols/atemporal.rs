use crate::dsl::Circuit;
use crate::opalg::ModeKind::{EntanglementSeed, Signal};
use crate::output::Side;

use super::builder::{ex, t, td, tp, B};
use super::{Opts, Overrides};

fn resource(b: &mut B) {
    b.mode(EntanglementSeed, "e1", "alice", 0);
    b.mode(EntanglementSeed, "e2", "bob", 0);
    b.mode(Signal, "j", "input", 0);
    b.squeeze(["a0", "b0"], "e1", "e2", ex("s"), ex("0"));
}

pub(super) fn telefilter(o: &Opts, ov: &mut Overrides) -> Circuit {
    let tanh = o.get("gain") == "tanh";
    let mut b = B::default();
    b.comment("Single-mode telefilter: Alice measures j against her half of the pair,");
    b.comment("Bob displaces his half by the result.");
    ov.infinite(&mut b, "s");
    resource(&mut b);
    b.homodyne("M", "j", "a0", ex("0"));
    let gain = if tanh { "tanh(s)/sqrt(2)" } else { "1/sqrt(2)" };
    b.displace("jout", "b0", "M", ex(gain));
    b.blank();
    b.output("out", "jout", Side::Transmitted);
    b.target("j_mode", vec![t("j", ex("1"))]);
    if tanh {
        b.expect("out", vec![t("j", ex("tanh(s)")), t("e2", ex("sech(s)"))]);
    } else {
        b.expect(
            "out",
            vec![t("j", ex("1")), t("b0", ex("1")), td("a0", ex("-1"))],
        );
    }
    b.expect_perp("out", vec![tp("e2", ex("1"))]);
    b.c
}

pub(super) fn telemirror(o: &Opts, ov: &mut Overrides) -> Circuit {
    let matched = o.get("gain") == "matched";
    let single = o.get("reflect") == "single";
    let g = if matched { "s" } else { "r" };
    let mut b = B::default();
    b.comment("All-optical telemirror: a two-mode squeezer replaces the measurement and a");
    b.comment("beamsplitter replaces the displacement. Reflected modes are recovered by");
    b.comment("undoing the squeezing.");
    if !matched {
        ov.infinite(&mut b, "r");
    }
    ov.infinite(&mut b, "s");
    ov.value(&mut b, "t", "arccosh(5/4)");
    if single {
        ov.value(
            &mut b,
            "k",
            &format!("ln(cosh(t - {g} - s) - sinh(t - {g} - s))"),
        );
    }
    resource(&mut b);
    b.squeeze(["c0", "a1"], "j", "a0", ex(g), ex("0"));
    let alpha = if matched {
        "2/(3 + cosh(2*s))"
    } else {
        "sech(r)*sech(r)"
    };
    b.split(["cm", "jout"], "c0", "b0", ex(alpha), ex("-pi/2"));
    if single {
        b.unsqueeze(["r1", "r2"], "a1", "cm", ex("k"));
    } else {
        b.unsqueeze(["q1", "q2"], "a1", "cm", ex(g));
        b.unsqueeze(["p1", "p2"], "q1", "q2", ex("s"));
        b.squeeze(["r1", "r2"], "p1", "p2", ex("t"), ex("0"));
    }
    b.blank();
    b.output("out", "jout", Side::Transmitted);
    b.output("r1", "r1", Side::Reflected);
    b.output("r2", "r2", Side::Reflected);
    b.output("c0", "c0", Side::Aux);
    if !single {
        b.output("p1", "p1", Side::Aux);
        b.output("p2", "p2", Side::Aux);
    }
    b.target("j_mode", vec![t("j", ex("1"))]);
    if matched {
        b.expect(
            "out",
            vec![
                t("j", ex("sqrt(2)*cosh(s)/sqrt(3 + cosh(2*s))")),
                t("e2", ex("-sqrt(2)/sqrt(3 + cosh(2*s))")),
            ],
        );
        b.expect_perp(
            "out",
            vec![
                tp("j", ex("sqrt(2/(3 + cosh(2*s)))")),
                tp("b0", ex("-sqrt(1 - 2/(3 + cosh(2*s)))")),
            ],
        );
    } else {
        b.expect(
            "out",
            vec![
                t("j", ex("1")),
                t("b0", ex("-tanh(r)")),
                td("a0", ex("tanh(r)")),
            ],
        );
        b.expect_perp(
            "out",
            vec![tp("j", ex("sech(r)")), tp("b0", ex("-tanh(r)"))],
        );
    }
    b.expect_limit("out", vec![t("j", ex("1"))]);
    if !single {
        b.expect_limit("p1", vec![t("e1", ex("5/4")), td("e2", ex("-3/4"))]);
        b.expect_limit("p2", vec![t("e2", ex("5/4")), td("e1", ex("-3/4"))]);
    }
    b.expect_limit("r1", vec![t("e1", ex("1"))]);
    b.expect_limit("r2", vec![t("e2", ex("1"))]);
    b.expect_limit_perp("r2", vec![tp("j", ex("1"))]);
    b.c
}
