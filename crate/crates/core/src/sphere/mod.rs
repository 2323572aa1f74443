//! Orbits of the free group generated by three rotations of angle
//! `arccos(-3/5)` about the coordinate axes, cap discrepancy on S², and the
//! Hecke averaging operator restricted to each spherical-harmonic degree.

pub mod wigner;

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
pub use wigner::{character, euler_zyz, Rotation, WignerSmall};

/// Exact integer matrix; the rotation is `numer / 5^len`.
pub type IntMatrix = [[i64; 3]; 3];

/// Largest word length accepted by [`enumerate_words`].
pub const MAX_WORD_LENGTH: usize = 8;

/// Tolerance of the representation unitarity check.
pub const UNITARITY_TOL: f64 = 1e-8;

/// Letters `a, a^-1, b, b^-1, c, c^-1`: rotations about x, y, z. Letter `i`
/// has inverse `i ^ 1`.
pub const LETTER_NAMES: [&str; 6] = ["a", "A", "b", "B", "c", "C"];

/// Numerators (over 5) of the six generators, `sin θ = +4/5`.
pub fn lps_generators() -> [IntMatrix; 6] {
    let a = [[5, 0, 0], [0, -3, -4], [0, 4, -3]];
    let b = [[-3, 0, 4], [0, 5, 0], [-4, 0, -3]];
    let c = [[-3, -4, 0], [4, -3, 0], [0, 0, 5]];
    [a, transpose(&a), b, transpose(&b), c, transpose(&c)]
}

fn transpose(m: &IntMatrix) -> IntMatrix {
    let mut t = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

fn mul_int(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let mut out = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn det_int(m: &IntMatrix) -> i64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationWord {
    pub letters: Vec<u8>,
    pub numer: IntMatrix,
}

impl RotationWord {
    pub fn identity() -> Self {
        Self {
            letters: Vec::new(),
            numer: [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn denominator(&self) -> i64 {
        5i64.pow(self.len() as u32)
    }

    pub fn matrix(&self) -> Rotation {
        let den = self.denominator() as f64;
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = self.numer[i][j] as f64 / den;
            }
        }
        r
    }

    pub fn name(&self) -> String {
        self.letters.iter().map(|&l| LETTER_NAMES[l as usize]).collect()
    }

    /// `numer * 5^(len' - len)`: the matrix over the common denominator `5^len'`.
    pub fn scaled_to(&self, len: usize) -> IntMatrix {
        let s = 5i64.pow((len - self.len()) as u32);
        let mut m = self.numer;
        m.iter_mut().flatten().for_each(|v| *v *= s);
        m
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| w[0] != w[1] ^ 1)
    }
}

/// All reduced words of length `<= k`, depth first, letters in `a A b B c C`
/// order.
pub fn enumerate_words(k: usize) -> Result<Vec<RotationWord>> {
    if k > MAX_WORD_LENGTH {
        return Err(Error::Infeasible(format!(
            "word length {k} exceeds the limit {MAX_WORD_LENGTH}"
        )));
    }
    let gens = lps_generators();
    let mut out = Vec::with_capacity(word_count(k) as usize);
    let mut stack = vec![RotationWord::identity()];
    while let Some(w) = stack.pop() {
        if w.len() < k {
            let last = w.letters.last().copied();
            for l in (0..6u8).rev() {
                if last == Some(l ^ 1) {
                    continue;
                }
                let mut letters = w.letters.clone();
                letters.push(l);
                stack.push(RotationWord {
                    letters,
                    numer: mul_int(&w.numer, &gens[l as usize]),
                });
            }
        }
        out.push(w);
    }
    Ok(out)
}

/// `(3 * 5^k - 1) / 2`.
pub fn word_count(k: usize) -> u64 {
    (3 * 5u64.pow(k as u32) - 1) / 2
}

/// Number of distinct matrices among `words`, compared exactly.
pub fn distinct_matrices(words: &[RotationWord]) -> usize {
    let top = words.iter().map(|w| w.len()).max().unwrap_or(0);
    words.iter().map(|w| w.scaled_to(top)).collect::<HashSet<_>>().len()
}

/// Spherical cap `{y : angle(y, pole) <= theta}` (closed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub pole: [f64; 3],
    pub theta: f64,
}

impl Cap {
    pub fn new(pole: [f64; 3], theta: f64) -> Result<Self> {
        let n = norm3(&pole);
        if !(n > 0.0 && n.is_finite()) {
            return Err(invalid("pole", "must be a non-zero finite vector"));
        }
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(invalid("theta", "must lie in [0, pi]"));
        }
        Ok(Self {
            pole: [pole[0] / n, pole[1] / n, pole[2] / n],
            theta,
        })
    }

    /// Normalized measure `(1 - cos θ) / 2`.
    pub fn measure(&self) -> f64 {
        (1.0 - self.theta.cos()) / 2.0
    }

    pub fn contains(&self, y: &[f64; 3]) -> bool {
        dot3(y, &self.pole) >= self.theta.cos() - 1e-12
    }

    /// Normalized area of the band of angular half-width `t` about the rim.
    pub fn shell_measure(&self, t: f64) -> f64 {
        let lo = (self.theta - t).max(0.0);
        let hi = (self.theta + t).min(std::f64::consts::PI);
        (lo.cos() - hi.cos()) / 2.0
    }

    /// `sup_t t^-δ shell(t)` over a log grid of `t` in `[1e-4, π]`.
    pub fn minkowski_content(&self, delta: f64) -> f64 {
        let n = 400;
        let (a, b) = (1e-4f64.ln(), std::f64::consts::PI.ln());
        (0..n)
            .map(|i| {
                let t = (a + (b - a) * i as f64 / (n - 1) as f64).exp();
                self.shell_measure(t) / t.powf(delta)
            })
            .fold(0.0, f64::max)
    }
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

fn apply(r: &Rotation, x: &[f64; 3]) -> [f64; 3] {
    [dot3(&r[0], x), dot3(&r[1], x), dot3(&r[2], x)]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphereOrbit {
    pub base: [f64; 3],
    pub k: usize,
    pub points: Vec<[f64; 3]>,
}

impl SphereOrbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,z\n");
        for p in &self.points {
            s.push_str(&format!("{},{},{}\n", p[0], p[1], p[2]));
        }
        s
    }
}

/// Points `σ_j x` for the given words.
pub fn orbit(x: [f64; 3], words: &[RotationWord]) -> Result<SphereOrbit> {
    if (norm3(&x) - 1.0).abs() > 1e-12 {
        return Err(invalid("base", "must be a unit vector"));
    }
    let k = words.iter().map(|w| w.len()).max().unwrap_or(0);
    let points = words.iter().map(|w| apply(&w.matrix(), &x)).collect();
    Ok(SphereOrbit { base: x, k, points })
}

/// `|μ(Ω) - m^-1 #{j : σ_j x ∈ Ω}|`.
pub fn set_discrepancy(orbit: &SphereOrbit, cap: &Cap) -> f64 {
    let inside = orbit.points.iter().filter(|p| cap.contains(p)).count();
    (cap.measure() - inside as f64 / orbit.len() as f64).abs()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarmonicBlock {
    pub degree: usize,
    #[serde(skip)]
    pub matrix: DMatrix<Complex64>,
    pub norm: f64,
    /// `max |T - T^H|`.
    pub hermitian_defect: f64,
}

/// `T_ℓ = m^-1 sum_j D^ℓ(σ_j)` and its spectral norm.
pub fn hecke_block(words: &[RotationWord], degree: usize) -> Result<HarmonicBlock> {
    if degree > 50 {
        return Err(invalid("degree", "must be at most 50"));
    }
    if words.is_empty() {
        return Err(invalid("words", "must be non-empty"));
    }
    let w = WignerSmall::new(degree);
    let n = 2 * degree + 1;
    let mut sum = DMatrix::<Complex64>::zeros(n, n);
    for word in words {
        sum += w.checked_rotation(&word.matrix(), UNITARITY_TOL)?;
    }
    let t = sum / Complex64::new(words.len() as f64, 0.0);
    let herm = (&t - t.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let sym = (&t + t.adjoint()) * Complex64::new(0.5, 0.0);
    let norm = sym
        .symmetric_eigenvalues()
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    Ok(HarmonicBlock {
        degree,
        matrix: t,
        norm,
        hermitian_defect: herm,
    })
}

/// `max_{1 <= ℓ <= L} ||T_ℓ||`, a lower bound for the non-trivial spectral
/// radius, and the per-degree norms.
pub fn rho_hat(words: &[RotationWord], max_degree: usize) -> Result<(f64, Vec<f64>)> {
    if max_degree == 0 {
        return Err(invalid("L", "must be at least 1"));
    }
    let norms: Vec<f64> = (1..=max_degree)
        .into_par_iter()
        .map(|l| hecke_block(words, l).map(|b| b.norm))
        .collect::<Result<_>>()?;
    Ok((norms.iter().copied().fold(0.0, f64::max), norms))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphereBound {
    pub m: usize,
    pub delta: f64,
    pub rho: f64,
    pub minkowski: f64,
    pub grid_min: f64,
    pub grid_argmin: f64,
    pub formula_r: f64,
    pub formula_value: f64,
}

/// `M(δ, Ω) (R^-δ + R^{(2-δ)/2} ρ)`, minimized over `R = 2^{j/4}`,
/// `0 <= j <= 48`, and the formula R (included in the grid).
pub fn sphere_bound(m: usize, cap: &Cap, delta: f64, rho: f64) -> Result<SphereBound> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid("delta", "must lie in (0, 1]"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(invalid("rho", "must lie in (0, 1]"));
    }
    if m < 2 {
        return Err(invalid("m", "must be at least 2"));
    }
    let minkowski = cap.minkowski_content(delta);
    let f = |r: f64| minkowski * (r.powf(-delta) + r.powf((2.0 - delta) / 2.0) * rho);
    let mf = m as f64;
    let formula_r = mf.powf(1.0 / (2.0 + delta)) * mf.ln().powf(-2.0 / (2.0 + delta));
    let mut best = (formula_r, f(formula_r));
    for j in 0..=48 {
        let r = 2f64.powf(j as f64 / 4.0);
        let v = f(r);
        if v < best.1 {
            best = (r, v);
        }
    }
    Ok(SphereBound {
        m,
        delta,
        rho,
        minkowski,
        grid_min: best.1,
        grid_argmin: best.0,
        formula_r,
        formula_value: f(formula_r),
    })
}

/// Uniform random unit vectors from a seeded stream.
pub fn random_unit_vectors(count: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - z * z).sqrt();
            [s * phi.cos(), s * phi.sin(), z]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_rotations() {
        for g in lps_generators() {
            assert_eq!(det_int(&g), 125);
            let p = mul_int(&g, &transpose(&g));
            assert_eq!(p, [[25, 0, 0], [0, 25, 0], [0, 0, 25]]);
            assert_eq!(g[0][0] + g[1][1] + g[2][2], -1);
        }
    }

    #[test]
    fn word_counts() {
        assert_eq!(enumerate_words(0).unwrap().len(), 1);
        assert_eq!(enumerate_words(1).unwrap().len(), 7);
        let w = enumerate_words(3).unwrap();
        assert_eq!(w.len(), 187);
        assert!(w.iter().all(|x| x.is_reduced()));
        assert_eq!(distinct_matrices(&w), 187);
        assert!(enumerate_words(9).is_err());
    }

    #[test]
    fn degree_zero_block_is_one() {
        let w = enumerate_words(2).unwrap();
        let b = hecke_block(&w, 0).unwrap();
        assert!((b.matrix[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn blocks_are_hermitian() {
        let w = enumerate_words(2).unwrap();
        let b = hecke_block(&w, 6).unwrap();
        assert!(b.hermitian_defect < 1e-10);
        assert!(b.norm <= 1.0 + 1e-12);
    }

    #[test]
    fn whole_sphere_cap() {
        let w = enumerate_words(2).unwrap();
        let o = orbit([0.0, 0.0, 1.0], &w).unwrap();
        let cap = Cap::new([0.0, 0.0, 1.0], std::f64::consts::PI).unwrap();
        assert_eq!(cap.measure(), 1.0);
        assert_eq!(set_discrepancy(&o, &cap), 0.0);
    }

    #[test]
    fn sphere_bound_grid_beats_formula() {
        let cap = Cap::new([0.0, 0.0, 1.0], 1.0).unwrap();
        let b = sphere_bound(187, &cap, 1.0, 0.25).unwrap();
        assert!(b.grid_min <= b.formula_value);
        let m: f64 = 187.0;
        assert!((b.formula_r - m.cbrt() * m.ln().powf(-2.0 / 3.0)).abs() < 1e-12);
        assert!((b.minkowski - 1f64.sin()).abs() < 1e-3);
    }
}
