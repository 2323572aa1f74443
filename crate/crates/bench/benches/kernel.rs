use criterion::{criterion_group, criterion_main, Criterion};
use discrepancy_bench::kernel_2d;
use discrepancy_core::kernel::{autocorrelate, build_bump};
use std::hint::black_box;

fn bump(c: &mut Criterion) {
    c.bench_function("bump_and_autocorrelation_d2", |b| {
        b.iter(|| {
            let bump = build_bump(2, 1.0 / 256.0).unwrap();
            black_box(autocorrelate(&bump).unwrap())
        })
    });
}

fn table(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernel_table");
    g.sample_size(10);
    g.bench_function("build_d2", |b| b.iter(|| black_box(kernel_2d())));
    let k = kernel_2d();
    g.bench_function("tail_mass_lookup", |b| {
        b.iter(|| (0..1000).map(|i| k.tail_mass(black_box(i as f64 * 0.037))).sum::<f64>())
    });
    g.finish();
}

criterion_group!(benches, bump, table);
criterion_main!(benches);
