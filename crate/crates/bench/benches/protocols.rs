use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use telesim_bench::{default_circuits, finite_circuits, nmode_circuit};
use telesim_core::dsl::evaluate_circuit;
use telesim_core::report::analyze;
use telesim_core::verify::covariance_oracle;
use telesim_core::ParamEnv;

fn evaluate(c: &mut Criterion) {
    let env = ParamEnv::new();
    let mut g = c.benchmark_group("evaluate");
    for (name, circ) in default_circuits(4) {
        g.bench_with_input(BenchmarkId::from_parameter(name), &circ, |b, circ| {
            b.iter(|| evaluate_circuit(black_box(circ), &env).unwrap())
        });
    }
    g.finish();
}

fn verify(c: &mut Criterion) {
    let env = ParamEnv::new();
    let mut g = c.benchmark_group("verify");
    g.sample_size(10);
    for (name, circ) in default_circuits(3) {
        g.bench_with_input(BenchmarkId::from_parameter(name), &circ, |b, circ| {
            b.iter(|| analyze(black_box(circ), &env, true).unwrap())
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let env = ParamEnv::new();
    let mut g = c.benchmark_group("oracle");
    for (name, circ) in finite_circuits(4, 1.0) {
        g.bench_with_input(BenchmarkId::from_parameter(name), &circ, |b, circ| {
            b.iter(|| covariance_oracle(black_box(circ), &env).unwrap())
        });
    }
    g.finish();
}

fn nmode_scaling(c: &mut Criterion) {
    let env = ParamEnv::new();
    let mut g = c.benchmark_group("nmode_delayed_evaluate");
    for n in [2, 4, 8, 16] {
        let circ = nmode_circuit(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &circ, |b, circ| {
            b.iter(|| evaluate_circuit(black_box(circ), &env).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, evaluate, verify, oracle, nmode_scaling);
criterion_main!(benches);
