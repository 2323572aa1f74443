//! Periodized trigonometric minorant/majorant pair `A <= chi <= B` of degree R.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fft::{synthesize, unflatten};
use crate::kernel::KernelTable;
use crate::pointsets::frequencies_in_ball;
use crate::torus::{HSpectrum, TorusSet};

/// Relative accuracy assumed for interpolated `K^` values.
pub const KHAT_REL_ERROR: f64 = 1e-8;

/// Real trigonometric polynomial with frequencies `|k| < R`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrigPolynomial {
    pub dimension: usize,
    pub degree: f64,
    pub coefficients: Vec<(Vec<i64>, Complex64)>,
}

impl TrigPolynomial {
    /// Direct evaluation (real part of the coefficient sum).
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .map(|(k, c)| {
                let t = 2.0 * PI * k.iter().zip(x).map(|(&a, b)| a as f64 * b).sum::<f64>();
                c.re * t.cos() - c.im * t.sin()
            })
            .sum()
    }

    /// Values on the grid `j / n` (row-major).
    pub fn synthesize(&self, n: usize) -> Vec<f64> {
        synthesize(n, self.dimension, &self.coefficients)
    }

    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        self.coefficients
            .iter()
            .find(|(q, _)| q.as_slice() == k)
            .map_or(Complex64::new(0.0, 0.0), |(_, c)| *c)
    }

    /// Largest `|c(-k) - conj c(k)|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|(k, c)| {
                let neg: Vec<i64> = k.iter().map(|v| -v).collect();
                (self.coefficient(&neg) - c.conj()).norm()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MajorantPair {
    pub r: f64,
    pub a: TrigPolynomial,
    pub b: TrigPolynomial,
    /// `H_R^(0)`.
    pub h0: f64,
    /// Pointwise error budget for A and B individually.
    pub budget: f64,
    /// Its Ĥ_R part alone.
    pub h_error: f64,
}

/// Coefficients `K^(k/R) (chi^(k) -+ H_R^(k))` for `|k| < R`.
pub fn majorant_pair(set: &TorusSet, kernel: &KernelTable, r: f64) -> Result<MajorantPair> {
    if r < 4.0 {
        return Err(invalid("R", "must be at least 4"));
    }
    let h = HSpectrum::new(set, kernel, r)?;
    majorant_pair_with(set, kernel, &h)
}

pub fn majorant_pair_with(set: &TorusSet, kernel: &KernelTable, h: &HSpectrum) -> Result<MajorantPair> {
    let d = set.dimension();
    if d != kernel.dimension() {
        return Err(invalid("kernel", "dimension differs from the set"));
    }
    let r = h.r;
    let freqs = frequencies_in_ball(d, r);
    let rows: Vec<Result<(Vec<i64>, f64, Complex64, Complex64, f64)>> = freqs
        .par_iter()
        .map(|k| {
            let kn = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
            let kh = kernel.khat(kn / r);
            let chi = set.fourier_coefficient(k);
            let (hk, unc) = h.coefficient(k)?;
            Ok((k.clone(), kh, chi, hk, unc))
        })
        .collect();
    let mut a = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    let mut h_error = 0.0;
    let mut khat_error = 0.0;
    let mut magnitude = 0.0;
    let mut h0 = 0.0;
    for row in rows {
        let (k, kh, chi, hk, unc) = row?;
        if k.iter().all(|&v| v == 0) {
            h0 = hk.re;
        }
        a.push((k.clone(), kh * (chi - hk)));
        b.push((k, kh * (chi + hk)));
        h_error += kh.abs() * unc;
        khat_error += KHAT_REL_ERROR * kh.abs() * (chi.norm() + hk.norm());
        magnitude += kh.abs() * (chi.norm() + hk.norm());
    }
    let budget = h_error + khat_error + 1e-13 * magnitude.max(1.0);
    Ok(MajorantPair {
        r,
        a: TrigPolynomial {
            dimension: d,
            degree: r,
            coefficients: a,
        },
        b: TrigPolynomial {
            dimension: d,
            degree: r,
            coefficients: b,
        },
        h0,
        budget,
        h_error,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Violation {
    /// Largest positive violation (0 if none).
    pub max: f64,
    /// Fraction of grid points with a positive violation.
    pub fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichReport {
    pub r: f64,
    pub grid_n: usize,
    pub budget: f64,
    /// `A <= chi`.
    pub lower: Violation,
    /// `chi <= B`.
    pub upper: Violation,
    /// `B - A <= psi(R dist)`.
    pub width: Violation,
    /// `max (B - A)` over grid points with `dist >= 8 / R`, and `psi(8)`.
    pub far_field_width: f64,
    pub psi_at_8: f64,
    /// `A^(0)`, `mu`, `B^(0)`.
    pub mean_a: f64,
    pub measure: f64,
    pub mean_b: f64,
    /// Largest observed `(B - A) / psi(R dist)`.
    pub width_ratio: f64,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.lower.max <= self.budget
            && self.upper.max <= self.budget
            && self.width.max <= 2.0 * self.budget
            && self.mean_a <= self.measure + self.budget
            && self.measure <= self.mean_b + self.budget
    }
}

/// One row of the sandwich CSV.
#[derive(Debug, Clone)]
pub struct SandwichRow {
    pub x: Vec<f64>,
    pub chi: f64,
    pub a: f64,
    pub b: f64,
    pub psi_bound: f64,
}

/// Evaluates the pair on the `grid_n^d` grid and measures the three
/// inequalities. Returns the report and the grid rows.
pub fn sandwich_report(
    pair: &MajorantPair,
    set: &TorusSet,
    kernel: &KernelTable,
    grid_n: usize,
) -> Result<(SandwichReport, Vec<SandwichRow>)> {
    let r = pair.r;
    if (grid_n as f64) < 4.0 * r {
        return Err(invalid("grid_n", "must be at least 4R"));
    }
    let d = set.dimension();
    let av = pair.a.synthesize(grid_n);
    let bv = pair.b.synthesize(grid_n);
    let rows: Vec<SandwichRow> = (0..av.len())
        .into_par_iter()
        .map(|idx| {
            let x: Vec<f64> = unflatten(idx, grid_n, d)
                .iter()
                .map(|&j| j as f64 / grid_n as f64)
                .collect();
            let chi = if set.contains(&x) { 1.0 } else { 0.0 };
            let dist = set.boundary_distance(&x);
            let psi_bound = kernel.psi(r * dist).expect("distance is nonnegative");
            SandwichRow {
                x,
                chi,
                a: av[idx],
                b: bv[idx],
                psi_bound,
            }
        })
        .collect();
    let n = rows.len() as f64;
    let tally = |f: &dyn Fn(&SandwichRow) -> f64| {
        let mut max: f64 = 0.0;
        let mut count = 0usize;
        for row in &rows {
            let v = f(row);
            if v > 0.0 {
                max = max.max(v);
                count += 1;
            }
        }
        Violation {
            max,
            fraction: count as f64 / n,
        }
    };
    let lower = tally(&|row| row.a - row.chi);
    let upper = tally(&|row| row.chi - row.b);
    let width = tally(&|row| (row.b - row.a) - row.psi_bound);
    let far = 8.0 / r;
    let far_field_width = rows
        .iter()
        .filter(|row| set.boundary_distance(&row.x) >= far)
        .map(|row| row.b - row.a)
        .fold(0.0, f64::max);
    let width_ratio = rows
        .iter()
        .map(|row| (row.b - row.a) / row.psi_bound)
        .fold(0.0, f64::max);
    let zero = vec![0; d];
    let report = SandwichReport {
        r,
        grid_n,
        budget: pair.budget,
        lower,
        upper,
        width,
        far_field_width,
        psi_at_8: kernel.psi(8.0)?,
        mean_a: pair.a.coefficient(&zero).re,
        measure: set.measure(),
        mean_b: pair.b.coefficient(&zero).re,
        width_ratio,
    };
    Ok((report, rows))
}

/// Spot check of `|chi - K_R * chi|(x) <= I(R dist(x)) + budget` at the given
/// points; returns the largest excess over `I(R dist)` (negative when the
/// inequality holds with room).
pub fn convolution_claim_excess(set: &TorusSet, kernel: &KernelTable, r: f64, xs: &[Vec<f64>]) -> f64 {
    let d = set.dimension();
    let coeffs: Vec<(Vec<i64>, Complex64)> = frequencies_in_ball(d, r)
        .into_iter()
        .map(|k| {
            let kn = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
            let c = kernel.khat(kn / r) * set.fourier_coefficient(&k);
            (k, c)
        })
        .collect();
    let smooth = TrigPolynomial {
        dimension: d,
        degree: r,
        coefficients: coeffs,
    };
    xs.iter()
        .map(|x| {
            let chi = if set.contains(x) { 1.0 } else { 0.0 };
            let lhs = (chi - smooth.eval(x)).abs();
            lhs - kernel.tail_mass(r * set.boundary_distance(x))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
