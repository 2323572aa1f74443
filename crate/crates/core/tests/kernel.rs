mod common;

use std::f64::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use discrepancy_core::kernel::{autocorrelate, build_bump, tail_ratio_floor, KernelConfig, KernelTable};
use discrepancy_core::quadrature::CompositeRule;

fn table() -> &'static KernelTable {
    static T: OnceLock<KernelTable> = OnceLock::new();
    T.get_or_init(|| KernelTable::build(&KernelConfig::new(2)).expect("d = 2 table builds"))
}

#[test]
fn bump_constant_matches_adaptive_oracle() {
    let bump = build_bump(2, 1.0 / 256.0).unwrap();
    let raw = |r: f64| {
        let gap = 0.25 - r * r;
        if gap <= 0.0 {
            0.0
        } else {
            (-2.0 / gap).exp() * r
        }
    };
    let integral = 2.0 * PI * common::adaptive_real(&raw, 0.0, 0.5, 1e-20);
    let want = integral.powf(-0.5);
    assert!((bump.normalization - want).abs() <= 1e-6 * want);
    assert!((bump.square_integral() - 1.0).abs() < 1e-8);
}

#[test]
fn autocorrelation_endpoints_and_monte_carlo() {
    let bump = build_bump(2, 1.0 / 256.0).unwrap();
    let auto = autocorrelate(&bump).unwrap();
    assert!((auto.eval(0.0) - 1.0).abs() < 1e-6);
    assert!(auto.eval(1.0).abs() < 1e-12);
    // (m * m)(xi) = int m(y) m(xi - y) dy with y uniform in the disk |y| < 1/2.
    let xi = [0.5, 0.0];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 10_000_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let rad = 0.5 * rng.random::<f64>().sqrt();
        let ang = rng.random_range(0.0..2.0 * PI);
        let y = [rad * ang.cos(), rad * ang.sin()];
        let v = bump.value(rad) * bump.value(((xi[0] - y[0]).powi(2) + (xi[1] - y[1]).powi(2)).sqrt());
        s += v;
        s2 += v * v;
    }
    let area = PI / 4.0;
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt() * area;
    let mc = mean * area;
    assert!((auto.eval(0.5) - mc).abs() <= 3.0 * se, "{} vs {mc} +- {se}", auto.eval(0.5));
}

#[test]
fn kernel_claims_hold() {
    let k = table();
    assert!(k.diagnostics.min_k >= -1e-6);
    assert!((k.tail_mass(0.0) - 1.0).abs() < 1e-6);
    assert!((k.diagnostics.mean - 1.0).abs() < 1e-5);
    let floor = tail_ratio_floor();
    assert!((floor - (-2.0 * PI).exp()).abs() < 1e-18);
    for t in k.tail.grid().filter(|t| *t + 1.0 <= k.config.t_max) {
        assert!(k.tail_mass(t + 1.0) >= floor * k.tail_mass(t) - 1e-9, "t = {t}");
    }
}

#[test]
fn gamma_matches_monte_carlo_ball_integral() {
    let k = table();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 2_000_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let r = rng.random::<f64>().sqrt();
        let v = k.k(r);
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt() * PI;
    let mass = mean * PI;
    let gamma_inv = (-2.0 * PI).exp() * mass;
    let se_inv = (-2.0 * PI).exp() * se;
    assert!((1.0 / k.gamma - gamma_inv).abs() <= 3.0 * se_inv);
}

#[test]
fn forward_transform_recovers_khat() {
    let k = table();
    let rule = CompositeRule::new(0.0, k.config.x_max, 4000, 8);
    let weighted: Vec<(f64, f64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&r, &w)| (r, w * 2.0 * PI * r * k.k(r)))
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..=64 {
        let rho = i as f64 / 64.0;
        let fwd: f64 = weighted.iter().map(|(r, w)| w * libm::j0(2.0 * PI * rho * r)).sum();
        worst = worst.max((fwd - k.khat(rho)).abs());
    }
    assert!(worst <= 1e-4, "sup error {worst}");
}

#[test]
fn psi_profile() {
    let k = table();
    assert!((k.psi(0.0).unwrap() - 4.0 * k.gamma).abs() < 1e-6 * k.gamma);
    assert!(k.psi(-1.0).is_err());
    let grid: Vec<f64> = (0..1000).map(|i| i as f64 * 0.1).collect();
    for w in grid.windows(2) {
        assert!(k.psi(w[1]).unwrap() <= k.psi(w[0]).unwrap());
    }
    let c4 = k.decay_profile().decay_constant(4.0);
    assert!(c4.is_finite() && c4 < 1e6, "c(4) = {c4}");
    assert!(k.check_h_identity() < 1e-12);
}

#[test]
fn cache_round_trip_is_exact() {
    let k = table();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.json");
    k.save(&path).unwrap();
    let back = KernelTable::load(&path).unwrap();
    assert_eq!(back.gamma.to_bits(), k.gamma.to_bits());
    for t in [0.0, 0.3, 1.7, 9.99, 25.0] {
        assert_eq!(back.tail_mass(t).to_bits(), k.tail_mass(t).to_bits());
        assert_eq!(back.k(t).to_bits(), k.k(t).to_bits());
    }
    let again = KernelTable::load_or_build(&k.config, &path).unwrap();
    assert_eq!(again.provenance(), k.provenance());
}

#[test]
fn rejects_bad_configs() {
    assert!(build_bump(4, 1.0 / 256.0).is_err());
    assert!(build_bump(2, 0.1).is_err());
    let mut c = KernelConfig::new(2);
    c.x_max = 10.0;
    assert!(KernelTable::build(&c).is_err());
}

#[test]
fn other_dimensions_build() {
    for d in [1, 3] {
        let k = KernelTable::build(&KernelConfig::new(d)).unwrap();
        assert!((k.diagnostics.mean - 1.0).abs() < 1e-5, "d = {d}");
        assert!(k.diagnostics.min_k >= -1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tail_mass_is_nonincreasing(a in 0.0f64..60.0, b in 0.0f64..60.0) {
        let k = table();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(k.tail_mass(hi) <= k.tail_mass(lo));
    }

    #[test]
    fn khat_vanishes_outside_unit_ball(rho in 1.0f64..5.0) {
        prop_assert_eq!(table().khat(rho), 0.0);
    }
}
