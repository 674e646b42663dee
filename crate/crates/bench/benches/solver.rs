//! Benchmarks for the hot paths: stencil assembly, operator application,
//! Crank-Nicolson stepping, and the spectral oracle transform.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nlheat::domain::{mollified_dirac, ConstraintData, DEFAULT_MOLLIFY_TIME};
use nlheat::evolution::{evolve, EvolveConfig};
use nlheat::kernel::{cell_moments, FractionalOrder, KernelSpec};
use nlheat::operator::apply;
use nlheat::oracle::{spectral_solution, SpectralBox};
use nlheat_bench::setup_operator;

fn bench_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    for &m in &[400usize, 3200] {
        let delta = m as f64 * 0.005;
        group.bench_with_input(BenchmarkId::from_parameter(m), &delta, |b, &delta| {
            b.iter(|| setup_operator(0.5, 1.0, 0.005, black_box(delta)).1);
        });
    }
    group.finish();
}

fn bench_apply(c: &mut Criterion) {
    let (_, op, u0) = setup_operator(0.5, 2.0, 0.005, 4.0);
    c.bench_function("apply_full_n800_m800", |b| {
        b.iter(|| apply(black_box(&op), black_box(&u0)).unwrap());
    });
}

fn bench_cn_steps(c: &mut Criterion) {
    let (_, op, u0) = setup_operator(0.5, 1.0, 0.005, 2.0);
    let cfg = EvolveConfig::new(0.001, 0.02).unwrap().with_trace_every(100);
    c.bench_function("cn_20_steps_n400_dense", |b| {
        b.iter(|| evolve(black_box(&op), &u0, &ConstraintData::Homogeneous, &cfg).unwrap());
    });
}

fn bench_spectral(c: &mut Criterion) {
    let bx = SpectralBox::new(80.0, 1 << 15, FractionalOrder::new(0.5).unwrap())
        .unwrap()
        .with_tail_tolerance(1.0);
    let u0 = bx.sample(|x| mollified_dirac(x, DEFAULT_MOLLIFY_TIME));
    c.bench_function("spectral_solution_2p15", |b| {
        b.iter(|| spectral_solution(&bx, black_box(&u0), 1.0).unwrap());
    });
}

fn bench_moments(c: &mut Criterion) {
    let spec = KernelSpec::truncated(FractionalOrder::new(0.75).unwrap(), 1.0, 0.001).unwrap();
    c.bench_function("cell_moments_power_piece", |b| {
        b.iter(|| cell_moments(&spec, black_box(0.25), black_box(0.255), 1).unwrap());
    });
}

criterion_group!(
    benches,
    bench_assembly,
    bench_apply,
    bench_cn_steps,
    bench_spectral,
    bench_moments
);
criterion_main!(benches);
