use crate::dsl::{Circuit, ModeTerm};
use crate::opalg::ModeKind::{EntanglementSeed, Signal, Vacuum};
use crate::output::Side;

use super::builder::{ex, t, td, tp, B};
use super::{Opts, Overrides};

fn product(factors: Vec<String>) -> String {
    if factors.is_empty() {
        "1".to_string()
    } else {
        factors.join("*")
    }
}

/// Weight of the seed in cascade port `k` (1-based) of `n`.
fn seed_weight(k: usize, n: usize, general: bool) -> String {
    let mut f: Vec<String> = (1..k).map(|l| format!("sqrt(alpha{l})")).collect();
    if k < n {
        if general {
            f.push(format!("-i*exp(-i*phi{k})*sqrt(1 - alpha{k})"));
        } else {
            f.push(format!("sqrt(1 - alpha{k})"));
        }
    }
    product(f)
}

/// Weight of vacuum `m` in cascade port `k` for the real cascade, or `None` when zero.
fn vacuum_weight(k: usize, m: usize, n: usize) -> Option<String> {
    if k < m {
        return None;
    }
    if k == m {
        return Some(format!("sqrt(alpha{m})"));
    }
    let mut f = vec![format!("sqrt(1 - alpha{m})")];
    f.extend((m + 1..k).map(|l| format!("sqrt(alpha{l})")));
    if k < n {
        f.push(format!("sqrt(1 - alpha{k})"));
    }
    Some(format!("-{}", product(f)))
}

fn setup(b: &mut B, n: usize, ov: &mut Overrides, general: bool) {
    ov.infinite(b, "s");
    for k in 1..n {
        ov.value(b, &format!("alpha{k}"), &format!("{}/{}", n - k, n + 1 - k));
    }
    if general {
        for k in 1..n {
            ov.value(b, &format!("phi{k}"), "-pi/2");
        }
    } else {
        ov.value(b, "quad", "pi/2");
    }
    b.mode(EntanglementSeed, "e1", "alice", 0);
    b.mode(EntanglementSeed, "e2", "bob", 0);
    for k in 1..n {
        b.mode(Vacuum, &format!("v{k}"), &format!("alice_aux{k}"), 0);
        b.mode(Vacuum, &format!("u{k}"), &format!("bob_aux{k}"), 0);
    }
    for k in 1..=n {
        b.mode(Signal, &format!("j{k}"), "input", k as u32);
    }
    b.squeeze(["a0", "b0"], "e1", "e2", ex("s"), ex("0"));
    for (side, vac) in [("a", "v"), ("b", "u")] {
        for k in 1..n {
            let prev = if k == 1 {
                format!("{side}0")
            } else {
                format!("{side}r{}", k - 1)
            };
            let rest = if k + 1 == n {
                format!("{side}{n}")
            } else {
                format!("{side}r{k}")
            };
            let phi = if general {
                format!("phi{k}")
            } else {
                "-pi/2".to_string()
            };
            b.split(
                [&format!("{side}{k}"), &rest],
                &prev,
                &format!("{vac}{k}"),
                ex(&format!("alpha{k}")),
                ex(&phi),
            );
        }
    }
}

fn recombine(b: &mut B, n: usize, general: bool) {
    for k in (1..n).rev() {
        let next = if k + 1 == n {
            format!("jp{n}")
        } else {
            format!("y{}", k + 1)
        };
        let phi = if general {
            format!("pi - phi{k}")
        } else {
            "3*pi/2".to_string()
        };
        b.split(
            [&format!("y{k}"), &format!("o{k}")],
            &format!("jp{k}"),
            &next,
            ex(&format!("alpha{k}")),
            ex(&phi),
        );
    }
    b.blank();
    for k in 1..=n {
        b.output(&format!("jp{k}"), &format!("jp{k}"), Side::Perbin);
    }
    b.output("selected", "y1", Side::Transmitted);
    for k in 1..n {
        b.output(&format!("other{k}"), &format!("o{k}"), Side::Transmitted);
    }
}

fn selected_terms(n: usize, general: bool, w: &str) -> Vec<ModeTerm> {
    (1..=n)
        .map(|k| {
            t(
                &format!("j{k}"),
                ex(&format!("{}{w}", seed_weight(k, n, general))),
            )
        })
        .collect()
}

pub(super) fn delayed(o: &Opts, ov: &mut Overrides) -> Circuit {
    let n = o.n;
    let mut b = B::default();
    b.comment("N-bin telefilter: a beamsplitter cascade spreads each half of the pair over");
    b.comment("the bins, and one combined measurement displaces every share of Bob's half.");
    setup(&mut b, n, ov, true);
    for k in 1..=n {
        b.homodyne(
            &format!("M{k}"),
            &format!("j{k}"),
            &format!("a{k}"),
            ex("0"),
        );
    }
    let terms = (1..=n)
        .map(|k| {
            (
                ex(&format!("{}/2", seed_weight(k, n, true))),
                format!("M{k}"),
            )
        })
        .collect();
    b.combine("M", terms);
    for k in 1..=n {
        let g = seed_weight(k, n, true);
        b.displace(
            &format!("jp{k}"),
            &format!("b{k}"),
            "M",
            ex(&format!("sqrt(2)*{g}")),
        );
    }
    recombine(&mut b, n, true);
    b.target("sel_mode", selected_terms(n, true, ""));
    let mut sel = selected_terms(n, true, "");
    sel.push(t("b0", ex("1")));
    sel.push(td("a0", ex("-1")));
    b.expect("selected", sel);
    for k in 1..n {
        b.expect(&format!("other{k}"), vec![t(&format!("u{k}"), ex("1"))]);
    }
    b.expect_perp("selected", vec![tp("b0", ex("1"))]);
    for k in 1..n {
        b.expect_perp(&format!("other{k}"), vec![tp(&format!("u{k}"), ex("1"))]);
    }
    b.c
}

pub(super) fn nodelay(o: &Opts, ov: &mut Overrides) -> Circuit {
    let n = o.n;
    let mut b = B::default();
    b.comment("N-bin telefilter with per-bin feed-forward through a real beamsplitter cascade.");
    setup(&mut b, n, ov, false);
    for k in 1..=n {
        b.homodyne(
            &format!("M{k}"),
            &format!("j{k}"),
            &format!("a{k}"),
            ex("quad"),
        );
        b.displace(
            &format!("jp{k}"),
            &format!("b{k}"),
            &format!("M{k}"),
            ex("exp(-i*quad)/sqrt(2)"),
        );
    }
    recombine(&mut b, n, false);
    let w = "*exp(-2*i*quad)";
    b.target("sel_mode", selected_terms(n, false, w));
    for k in 1..=n {
        b.expect(
            &format!("jp{k}"),
            vec![
                t(&format!("j{k}"), ex(&w[1..])),
                t(&format!("b{k}"), ex("1")),
                td(&format!("a{k}"), ex("-1")),
            ],
        );
    }
    let mut sel = selected_terms(n, false, w);
    sel.push(t("b0", ex("1")));
    sel.push(td("a0", ex("-1")));
    b.expect("selected", sel);
    for m in 1..n {
        let mut terms: Vec<ModeTerm> = (1..=n)
            .filter_map(|k| {
                vacuum_weight(k, m, n).map(|c| t(&format!("j{k}"), ex(&format!("{c}{w}"))))
            })
            .collect();
        terms.push(t(&format!("u{m}"), ex("1")));
        terms.push(td(&format!("v{m}"), ex("-1")));
        b.expect(&format!("other{m}"), terms);
    }
    b.expect_perp("selected", vec![tp("b0", ex("1"))]);
    for k in 1..n {
        b.expect_perp(&format!("other{k}"), vec![tp(&format!("u{k}"), ex("1"))]);
    }
    b.c
}
