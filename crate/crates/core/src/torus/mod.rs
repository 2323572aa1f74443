//! Sets on the torus T^d = R^d / Z^d: boxes, balls and convex polytopes.

pub mod chains;
pub mod polytope;
pub mod spectrum;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

pub use chains::ChainSystem;
pub use polytope::Polytope;
pub use spectrum::{f_constant, HSpectrum};

/// Set description as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SetSpec {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Polytope { vertices: Vec<Vec<f64>>, epsilon: f64 },
}

/// Membership convention, recorded in reports.
pub const MEMBERSHIP_CONVENTION: &str = "boxes half-open [a,b) per axis; balls and polytopes closed";

/// Wrap a coordinate difference into [-1/2, 1/2].
pub fn wrap(v: f64) -> f64 {
    v - v.round()
}

#[derive(Debug, Clone)]
pub struct BoxSet {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BallSet {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub enum TorusSet {
    Box(BoxSet),
    Ball(BallSet),
    Polytope(Polytope),
}

/// `mu{x : dist(x, boundary) < t}` with a standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellMeasure {
    pub value: f64,
    pub std_err: f64,
}

/// Monte Carlo sample count for polytope shell measures.
pub const SHELL_SAMPLES: usize = 1_000_000;
const SHELL_SEED: u64 = 0x5eed_5e11;

impl TorusSet {
    pub fn from_spec(spec: &SetSpec) -> Result<Self> {
        match spec {
            SetSpec::Box { lower, upper } => {
                let d = lower.len();
                if d == 0 || d > 3 || upper.len() != d {
                    return Err(Error::InvalidSet(format!(
                        "box needs matching lower/upper of dimension 1..=3, got {} and {}",
                        lower.len(),
                        upper.len()
                    )));
                }
                for (a, b) in lower.iter().zip(upper) {
                    if !(0.0 <= *a && a < b && *b <= 1.0) {
                        return Err(Error::InvalidSet(format!(
                            "box sides need 0 <= a < b <= 1, got [{a}, {b}]"
                        )));
                    }
                }
                if lower.iter().zip(upper).all(|(a, b)| b - a >= 1.0) {
                    return Err(Error::InvalidSet("box covers the whole torus".into()));
                }
                Ok(TorusSet::Box(BoxSet {
                    lower: lower.clone(),
                    upper: upper.clone(),
                }))
            }
            SetSpec::Ball { center, radius } => {
                let d = center.len();
                if d == 0 || d > 3 {
                    return Err(Error::UnsupportedDimension(d, "1, 2, 3"));
                }
                if !(*radius > 0.0 && *radius < 0.5) {
                    return Err(Error::InvalidSet(format!(
                        "ball radius must lie in (0, 1/2), got {radius}"
                    )));
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidSet("ball center must be finite".into()));
                }
                Ok(TorusSet::Ball(BallSet {
                    center: center.iter().map(|c| c.rem_euclid(1.0)).collect(),
                    radius: *radius,
                }))
            }
            SetSpec::Polytope { vertices, epsilon } => Ok(TorusSet::Polytope(
                Polytope::from_vertices(vertices.clone(), *epsilon)?,
            )),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SetSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn spec(&self) -> SetSpec {
        match self {
            TorusSet::Box(b) => SetSpec::Box {
                lower: b.lower.clone(),
                upper: b.upper.clone(),
            },
            TorusSet::Ball(b) => SetSpec::Ball {
                center: b.center.clone(),
                radius: b.radius,
            },
            TorusSet::Polytope(p) => SetSpec::Polytope {
                vertices: p.vertices.clone(),
                epsilon: p.epsilon,
            },
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            TorusSet::Box(b) => b.lower.len(),
            TorusSet::Ball(b) => b.center.len(),
            TorusSet::Polytope(p) => p.dimension,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TorusSet::Box(_) => "box",
            TorusSet::Ball(_) => "ball",
            TorusSet::Polytope(_) => "polytope",
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            TorusSet::Box(b) => b.lower.iter().zip(&b.upper).map(|(a, b)| b - a).product(),
            TorusSet::Ball(b) => ball_volume(b.center.len(), b.radius),
            TorusSet::Polytope(p) => p.volume(),
        }
    }

    /// Membership under [`MEMBERSHIP_CONVENTION`].
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            TorusSet::Box(b) => b.lower.iter().zip(&b.upper).zip(x).all(|((a, hi), v)| {
                let w = hi - a;
                if w >= 1.0 {
                    return true;
                }
                let u = (v - a).rem_euclid(1.0);
                u < w
            }),
            TorusSet::Ball(b) => {
                let r2: f64 = x
                    .iter()
                    .zip(&b.center)
                    .map(|(v, c)| wrap(v - c).powi(2))
                    .sum();
                r2 <= b.radius * b.radius
            }
            TorusSet::Polytope(p) => p.contains(x),
        }
    }

    /// Distance from `x` to the boundary of the periodized set.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            TorusSet::Box(b) => box_distance(b, x),
            TorusSet::Ball(b) => {
                let d = b.center.len();
                let diff: Vec<f64> = x.iter().zip(&b.center).map(|(v, c)| wrap(v - c)).collect();
                let mut best = f64::INFINITY;
                for copy in 0..3usize.pow(d as u32) {
                    let mut r2 = 0.0;
                    let mut c = copy;
                    for v in &diff {
                        let shift = (c % 3) as f64 - 1.0;
                        c /= 3;
                        r2 += (v + shift).powi(2);
                    }
                    best = best.min((r2.sqrt() - b.radius).abs());
                }
                best
            }
            TorusSet::Polytope(p) => p.boundary_distance(x),
        }
    }

    /// Fourier coefficient `chi^(k) = int_{T^d} chi(x) e^{-2 pi i k.x} dx`.
    pub fn fourier_coefficient(&self, k: &[i64]) -> Complex64 {
        match self {
            TorusSet::Box(b) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for ((a, hi), &kj) in b.lower.iter().zip(&b.upper).zip(k) {
                    acc *= if kj == 0 {
                        Complex64::new(hi - a, 0.0)
                    } else {
                        let w = 2.0 * PI * kj as f64;
                        let ea = Complex64::new(0.0, -w * a).exp();
                        let eb = Complex64::new(0.0, -w * hi).exp();
                        (ea - eb) / Complex64::new(0.0, w)
                    };
                }
                acc
            }
            TorusSet::Ball(b) => {
                let d = b.center.len();
                let kn = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
                let shift: f64 = k.iter().zip(&b.center).map(|(&kj, c)| kj as f64 * c).sum();
                let ph = Complex64::new(0.0, -2.0 * PI * shift).exp();
                ph * ball_transform(d, b.radius, kn)
            }
            TorusSet::Polytope(p) => {
                let xi: Vec<f64> = k.iter().map(|&v| v as f64).collect();
                p.fourier_transform(&xi)
            }
        }
    }

    /// `mu{dist(x, boundary) < t}`: closed forms for boxes and balls, Monte
    /// Carlo for polytopes.
    pub fn shell_measure(&self, t: f64) -> ShellMeasure {
        self.shell_profile(&[t])[0]
    }

    pub fn shell_profile(&self, ts: &[f64]) -> Vec<ShellMeasure> {
        match self {
            TorusSet::Box(b) => ts
                .iter()
                .map(|&t| ShellMeasure {
                    value: box_shell(b, t),
                    std_err: 0.0,
                })
                .collect(),
            TorusSet::Ball(b) => ts
                .iter()
                .map(|&t| ShellMeasure {
                    value: ball_shell(b.center.len(), b.radius, t),
                    std_err: 0.0,
                })
                .collect(),
            TorusSet::Polytope(_) => self.monte_carlo_shell(ts, SHELL_SAMPLES, SHELL_SEED),
        }
    }

    /// Shell measures from `samples` uniform points (seeded, reproducible).
    pub fn monte_carlo_shell(&self, ts: &[f64], samples: usize, seed: u64) -> Vec<ShellMeasure> {
        let d = self.dimension();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dists = Vec::with_capacity(samples);
        let mut x = vec![0.0; d];
        for _ in 0..samples {
            x.iter_mut().for_each(|v| *v = rng.random::<f64>());
            dists.push(self.boundary_distance(&x));
        }
        dists.sort_by(f64::total_cmp);
        ts.iter()
            .map(|&t| {
                let count = dists.partition_point(|&v| v < t);
                let p = count as f64 / samples as f64;
                ShellMeasure {
                    value: p,
                    std_err: (p * (1.0 - p) / samples as f64).sqrt(),
                }
            })
            .collect()
    }
}

fn ball_volume(d: usize, r: f64) -> f64 {
    match d {
        1 => 2.0 * r,
        2 => PI * r * r,
        _ => 4.0 / 3.0 * PI * r * r * r,
    }
}

/// Fourier transform of the centered ball of radius r at frequency norm `kn`.
fn ball_transform(d: usize, r: f64, kn: f64) -> Complex64 {
    if kn == 0.0 {
        return Complex64::new(ball_volume(d, r), 0.0);
    }
    let s = 2.0 * PI * r * kn;
    let v = match d {
        1 => s.sin() / (PI * kn),
        2 => r * libm::j1(s) / kn,
        _ => (s.sin() - s * s.cos()) / (2.0 * PI * PI * kn.powi(3)),
    };
    Complex64::new(v, 0.0)
}

/// Per-axis distance from `v` to the periodic interval [a, b) (0 inside).
fn axis_gap(a: f64, b: f64, v: f64) -> f64 {
    let w = b - a;
    if w >= 1.0 {
        return 0.0;
    }
    let u = (v - a).rem_euclid(1.0);
    if u <= w {
        0.0
    } else {
        (u - w).min(1.0 - u)
    }
}

fn box_distance(b: &BoxSet, x: &[f64]) -> f64 {
    let gaps: Vec<f64> = b
        .lower
        .iter()
        .zip(&b.upper)
        .zip(x)
        .map(|((a, hi), v)| axis_gap(*a, *hi, *v))
        .collect();
    if gaps.iter().all(|g| *g == 0.0) {
        // Inside (or on the boundary): nearest face.
        b.lower
            .iter()
            .zip(&b.upper)
            .zip(x)
            .filter(|((a, hi), _)| *hi - *a < 1.0)
            .map(|((a, hi), v)| {
                let u = (v - a).rem_euclid(1.0);
                u.min(hi - a - u).max(0.0)
            })
            .fold(f64::INFINITY, f64::min)
    } else {
        gaps.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// Area of `{(u, v) in [0, a] x [0, b] : u^2 + v^2 < t^2}`.
fn quarter_disk_rect(t: f64, a: f64, b: f64) -> f64 {
    if t <= 0.0 || a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    let f = |u: f64| 0.5 * (u * (t * t - u * u).max(0.0).sqrt() + t * t * (u / t).clamp(-1.0, 1.0).asin());
    let ua = a.min(t);
    if b >= t {
        return f(ua);
    }
    let u0 = (t * t - b * b).sqrt();
    if a <= u0 {
        a * b
    } else {
        b * u0 + f(ua) - f(u0)
    }
}

/// Volume of `{(u, v, w) in [0,a]x[0,b]x[0,c] : |(u,v,w)| < t}`.
fn octant_ball_box(t: f64, a: f64, b: f64, c: f64) -> f64 {
    if t <= 0.0 || a <= 0.0 || b <= 0.0 || c <= 0.0 {
        return 0.0;
    }
    let top = a.min(t);
    // Kinks of the cross-section area where sqrt(t^2 - u^2) crosses b, c, |(b,c)|.
    let mut cuts = vec![0.0, top];
    for s in [b, c, (b * b + c * c).sqrt()] {
        if s < t {
            let u = (t * t - s * s).sqrt();
            if u > 0.0 && u < top {
                cuts.push(u);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    let gl = GaussLegendre::new(24);
    cuts.windows(2)
        .map(|w| gl.integrate(w[0], w[1], |u| quarter_disk_rect((t * t - u * u).max(0.0).sqrt(), b, c)))
        .sum()
}

/// `mu{dist < t}` for a box: t-neighbourhood of the box minus the inner box.
fn box_shell(b: &BoxSet, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let w: Vec<f64> = b.lower.iter().zip(&b.upper).map(|(a, hi)| hi - a).collect();
    let g: Vec<f64> = w.iter().map(|wj| ((1.0 - wj) / 2.0).max(0.0)).collect();
    let inner: f64 = w
        .iter()
        .map(|&wj| if wj >= 1.0 { 1.0 } else { (wj - 2.0 * t).max(0.0) })
        .product();
    // Each axis: atom of mass w_j at gap 0 plus density 2 on (0, g_j].
    let neighbourhood = match w.len() {
        1 => (w[0] + 2.0 * t.min(g[0])).min(1.0),
        2 => {
            w[0] * w[1]
                + 2.0 * w[0] * t.min(g[1])
                + 2.0 * w[1] * t.min(g[0])
                + 4.0 * quarter_disk_rect(t, g[0], g[1])
        }
        _ => {
            let mut acc = w[0] * w[1] * w[2];
            for i in 0..3 {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                acc += 2.0 * w[j] * w[k] * t.min(g[i]);
                acc += 4.0 * w[i] * quarter_disk_rect(t, g[j], g[k]);
            }
            acc + 8.0 * octant_ball_box(t, g[0], g[1], g[2])
        }
    };
    (neighbourhood - inner).clamp(0.0, 1.0)
}

/// Measure of the union of periodic balls of radius `rho` (ball clipped to the
/// unit cell).
fn periodic_ball_union(d: usize, rho: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    match d {
        1 => (2.0 * rho).min(1.0),
        2 => disk_in_square(rho),
        _ => {
            if rho <= 0.5 {
                return ball_volume(3, rho);
            }
            if rho >= 0.75f64.sqrt() {
                return 1.0;
            }
            // Slices z in [0, min(rho, 1/2)] of the disk-in-square area.
            let top = rho.min(0.5);
            let mut cuts = vec![0.0, top];
            for s in [0.5f64, 0.5f64.sqrt()] {
                if s < rho {
                    let z = (rho * rho - s * s).sqrt();
                    if z > 0.0 && z < top {
                        cuts.push(z);
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            let gl = GaussLegendre::new(24);
            2.0 * cuts
                .windows(2)
                .map(|w| gl.integrate(w[0], w[1], |z| disk_in_square((rho * rho - z * z).max(0.0).sqrt())))
                .sum::<f64>()
        }
    }
}

/// Area of the disk of radius `rho` centred in the unit square.
fn disk_in_square(rho: f64) -> f64 {
    if rho <= 0.5 {
        PI * rho * rho
    } else if rho >= 0.5f64.sqrt() {
        1.0
    } else {
        let segment = rho * rho * (0.5 / rho).acos() - 0.5 * (rho * rho - 0.25).sqrt();
        PI * rho * rho - 4.0 * segment
    }
}

/// `mu{ | |x - c| - r | < t }` on the torus for a ball of radius r < 1/2.
fn ball_shell(d: usize, r: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let outer = periodic_ball_union(d, r + t);
    let inner = if t < r { ball_volume(d, r - t) } else { 0.0 };
    (outer - inner).clamp(0.0, 1.0)
}

/// Logarithmic grid of `n` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

/// Default grid for Minkowski contents: 200 log-spaced points in [1e-4, 1].
pub fn default_t_grid() -> Vec<f64> {
    log_grid(1e-4, 1.0, 200)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinkowskiContent {
    pub alpha: f64,
    pub value: f64,
    pub argmax_t: f64,
    /// Standard error of the maximizing shell estimate (0 when exact).
    pub std_err: f64,
    /// Whether the sup sits at an end of the grid.
    pub boundary_attained: bool,
}

/// `M(alpha, Omega) = sup_t t^{-alpha} mu{dist < t}` over `t_grid`.
pub fn minkowski_content(set: &TorusSet, alpha: f64, t_grid: &[f64]) -> Result<MinkowskiContent> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(crate::error::invalid("alpha", "must lie in [0, 1]"));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(crate::error::invalid("t_grid", "needs positive points"));
    }
    let shells = set.shell_profile(t_grid);
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, (t, s)) in t_grid.iter().zip(&shells).enumerate() {
        let v = s.value * t.powf(-alpha);
        if v > best.1 {
            best = (i, v);
        }
    }
    let (i, value) = best;
    Ok(MinkowskiContent {
        alpha,
        value,
        argmax_t: t_grid[i],
        std_err: shells[i].std_err * t_grid[i].powf(-alpha),
        boundary_attained: i == 0 || i + 1 == t_grid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(r: f64) -> TorusSet {
        TorusSet::from_spec(&SetSpec::Ball {
            center: vec![0.5, 0.5],
            radius: r,
        })
        .unwrap()
    }

    fn unit_box() -> TorusSet {
        TorusSet::from_spec(&SetSpec::Box {
            lower: vec![0.0, 0.0],
            upper: vec![0.5, 0.5],
        })
        .unwrap()
    }

    #[test]
    fn distances_closed_forms() {
        assert!((ball(0.25).boundary_distance(&[0.5, 0.5]) - 0.25).abs() < 1e-15);
        assert!((unit_box().boundary_distance(&[0.25, 0.25]) - 0.25).abs() < 1e-15);
        assert!((unit_box().boundary_distance(&[0.75, 0.75]) - (0.125f64).sqrt()).abs() < 1e-15);
        assert!((unit_box().boundary_distance(&[0.95, 0.25]) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn coefficient_at_zero_is_measure() {
        for s in [ball(0.25), unit_box()] {
            let c = s.fourier_coefficient(&[0, 0]);
            assert!((c.re - s.measure()).abs() < 1e-15);
        }
    }

    #[test]
    fn box_coefficient_modulus() {
        let c = unit_box().fourier_coefficient(&[1, 0]);
        assert!((c.norm() - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn membership_conventions() {
        let b = unit_box();
        assert!(b.contains(&[0.0, 0.0]));
        assert!(!b.contains(&[0.5, 0.25]));
        let c = ball(0.25);
        assert!(c.contains(&[0.75, 0.5]));
        assert!(!c.contains(&[0.76, 0.5]));
    }

    #[test]
    fn shells_are_monotone_and_saturate() {
        for s in [ball(0.25), ball(0.4), unit_box()] {
            let mut prev = 0.0;
            for t in log_grid(1e-4, 1.0, 100) {
                let v = s.shell_measure(t).value;
                assert!(v + 1e-15 >= prev);
                prev = v;
            }
            assert!((prev - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_t_shells() {
        let t = 1e-4;
        let v = ball(0.25).shell_measure(t).value;
        assert!((v / t - PI).abs() < 1e-6);
        // Box perimeter 2, shell 2 * perimeter * t to first order.
        let v = unit_box().shell_measure(t).value;
        assert!((v / t - 4.0).abs() < 1e-3);
    }

    #[test]
    fn three_dimensional_box_shell_matches_grid_count() {
        let b = BoxSet {
            lower: vec![0.1, 0.2, 0.3],
            upper: vec![0.5, 0.4, 0.9],
        };
        let set = TorusSet::Box(b.clone());
        let n = 80;
        for t in [0.03, 0.12, 0.3] {
            let mut count = 0usize;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let x = [(i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64, (k as f64 + 0.5) / n as f64];
                        if set.boundary_distance(&x) < t {
                            count += 1;
                        }
                    }
                }
            }
            let grid = count as f64 / (n * n * n) as f64;
            assert!((grid - box_shell(&b, t)).abs() < 0.02, "t={t} {grid} {}", box_shell(&b, t));
        }
    }

    #[test]
    fn minkowski_limits() {
        let m0 = minkowski_content(&ball(0.25), 0.0, &default_t_grid()).unwrap();
        assert!((m0.value - 1.0).abs() < 1e-12);
        let m1 = minkowski_content(&ball(0.25), 1.0, &default_t_grid()).unwrap();
        assert!(m1.value >= PI - 1e-9);
    }

    #[test]
    fn rejects_invalid_sets() {
        assert!(TorusSet::from_spec(&SetSpec::Ball { center: vec![0.0, 0.0], radius: 0.5 }).is_err());
        assert!(TorusSet::from_spec(&SetSpec::Box { lower: vec![0.5], upper: vec![0.2] }).is_err());
        assert!(TorusSet::from_json(r#"{"type":"ball","center":[0.5,0.5],"radius":0.25}"#).is_ok());
    }
}
