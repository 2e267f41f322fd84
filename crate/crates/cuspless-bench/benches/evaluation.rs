//! Closed-form curve evaluation against the fixed-step ODE oracles.
//!
//! Run with `cargo bench -p cuspless-bench`. The interesting comparison is
//! `analytic` vs `frenet-rk4` at n = 10000: the closed-form path must not
//! lose to the integrator it replaces.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use cuspless::oracle;
use cuspless_bench::bench_init;

fn curve_evaluation(c: &mut Criterion) {
    let beta = 1.0;
    let (g, l) = bench_init(beta);
    let lambda0 = oracle::closed_form_momentum(&g, 0.0);
    let mut group = c.benchmark_group("curve-evaluation");
    for &n in &[100usize, 1_000, 10_000] {
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("analytic", n), &n, |b, &n| {
            b.iter(|| g.sample_curve(l, n).expect("in-range"));
        });
        group.bench_with_input(BenchmarkId::new("frenet-rk4", n), &n, |b, &n| {
            b.iter(|| oracle::integrate_frenet(&g, l, n - 1).expect("in-range"));
        });
        group.bench_with_input(BenchmarkId::new("pmp-rk4", n), &n, |b, &n| {
            b.iter(|| oracle::integrate_pmp(lambda0, beta, l, n - 1).expect("in-range"));
        });
    }
    group.finish();
}

fn endpoint_evaluation(c: &mut Criterion) {
    let beta = 1.0;
    let (g, l) = bench_init(beta);
    c.bench_function("endpoint/analytic", |b| {
        b.iter(|| g.sample_curve(l, 2).expect("in-range"));
    });
}

criterion_group!(benches, curve_evaluation, endpoint_evaluation);
criterion_main!(benches);
