use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use discrepancy_bench::{ball_2d, kernel_2d, octahedron, pentagon};
use discrepancy_core::glp::{PhiTable, Strategy};
use discrepancy_core::pointsets::korobov;
use discrepancy_core::torus::{ChainSystem, HSpectrum};
use discrepancy_core::{et_bound, search};
use std::hint::black_box;

fn polytope_ft(c: &mut Criterion) {
    let p2 = pentagon();
    let p3 = octahedron();
    let mut g = c.benchmark_group("polytope_ft");
    g.bench_function("pentagon", |b| b.iter(|| p2.fourier_transform(black_box(&[3.0, -7.0]))));
    g.bench_function("pentagon_small_xi", |b| b.iter(|| p2.fourier_transform(black_box(&[0.01, 0.02]))));
    g.bench_function("octahedron", |b| b.iter(|| p3.fourier_transform(black_box(&[3.0, -7.0, 2.0]))));
    g.finish();
}

fn congruence(c: &mut Criterion) {
    let chains = ChainSystem::coordinate(2).unwrap();
    let mut g = c.benchmark_group("glp");
    for m in [101u64, 401] {
        let table = PhiTable::new(m, &chains).unwrap();
        g.bench_with_input(BenchmarkId::new("congruence_sum", m), &table, |b, t| {
            b.iter(|| t.congruence_sum(black_box(&[1, 39])).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("class_sums", m), &table, |b, t| b.iter(|| t.class_sums()));
    }
    g.sample_size(10);
    g.bench_function("exhaustive_search_809", |b| {
        b.iter(|| search(809, &chains, &Strategy::Exhaustive).unwrap())
    });
    g.finish();
}

fn bound(c: &mut Criterion) {
    let k = kernel_2d();
    let set = ball_2d();
    let pts = korobov(&[1, 233], 1021).unwrap();
    let mut g = c.benchmark_group("et_bound");
    g.sample_size(10);
    g.bench_function("h_spectrum_r16", |b| b.iter(|| HSpectrum::new(&set, &k, 16.0).unwrap()));
    g.bench_function("korobov_1021_r16", |b| b.iter(|| et_bound(&set, &pts, &k, 16.0).unwrap()));
    g.finish();
}

criterion_group!(benches, polytope_ft, congruence, bound);
criterion_main!(benches);
