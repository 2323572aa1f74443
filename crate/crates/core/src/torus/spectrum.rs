//! Fourier coefficients of radial profiles of the boundary distance,
//! `x -> f(dist(x, boundary))`, by tensor-grid quadrature with one level of
//! refinement as the error estimate.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TorusSet;
use crate::error::{invalid, Error, Result};
use crate::fft::{unflatten, GridSpectrum};
use crate::kernel::KernelTable;

/// Smallest power of two `>= max(8R, 256)`.
pub fn default_resolution(r: f64) -> usize {
    let want = (8.0 * r).ceil().max(256.0) as usize;
    want.next_power_of_two()
}

/// Samples of `f(dist(x))` on the grid `j / n`.
pub fn sample_profile(set: &TorusSet, n: usize, f: &(dyn Fn(f64) -> f64 + Sync)) -> Vec<f64> {
    let d = set.dimension();
    (0..n.pow(d as u32))
        .into_par_iter()
        .map(|idx| {
            let x: Vec<f64> = unflatten(idx, n, d).iter().map(|&j| j as f64 / n as f64).collect();
            f(set.boundary_distance(&x))
        })
        .collect()
}

/// Coefficients of a distance profile at resolutions `n` and `2n`.
#[derive(Debug, Clone)]
pub struct ProfileSpectrum {
    pub n: usize,
    coarse: GridSpectrum,
    fine: GridSpectrum,
}

impl ProfileSpectrum {
    pub fn build(set: &TorusSet, n: usize, f: &(dyn Fn(f64) -> f64 + Sync)) -> Self {
        let d = set.dimension();
        let fine_samples = sample_profile(set, 2 * n, f);
        // The coarse grid is every other fine node.
        let coarse_samples: Vec<f64> = (0..n.pow(d as u32))
            .map(|idx| {
                let j = unflatten(idx, n, d);
                let fine_idx = j.iter().fold(0, |acc, &v| acc * 2 * n + 2 * v);
                fine_samples[fine_idx]
            })
            .collect();
        Self {
            n,
            coarse: GridSpectrum::from_samples(n, d, coarse_samples),
            fine: GridSpectrum::from_samples(2 * n, d, fine_samples),
        }
    }

    /// Refined value and the change from the coarse grid as its uncertainty.
    pub fn coefficient(&self, k: &[i64]) -> Result<(Complex64, f64)> {
        let kmax = k.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        if kmax as usize * 4 > self.n {
            return Err(Error::ResolutionInsufficient {
                grid: self.n,
                freq: kmax as i64,
            });
        }
        let fine = self.fine.coefficient(k);
        let coarse = self.coarse.coefficient(k);
        Ok((fine, (fine - coarse).norm()))
    }
}

/// `H_R^(k)` for `H_R(x) = psi(2 R dist(x, boundary)) / 4 = gamma I(R dist)`.
#[derive(Debug, Clone)]
pub struct HSpectrum {
    pub r: f64,
    pub spectrum: ProfileSpectrum,
}

impl HSpectrum {
    pub fn new(set: &TorusSet, kernel: &KernelTable, r: f64) -> Result<Self> {
        Self::with_resolution(set, kernel, r, default_resolution(r))
    }

    pub fn with_resolution(set: &TorusSet, kernel: &KernelTable, r: f64, n: usize) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid("R", "must be positive"));
        }
        if set.dimension() != kernel.dimension() {
            return Err(invalid("kernel", "dimension differs from the set"));
        }
        if n < default_resolution(r) {
            return Err(Error::ResolutionInsufficient {
                grid: n,
                freq: r.ceil() as i64,
            });
        }
        let f = move |s: f64| kernel.h_profile(r * s);
        Ok(Self {
            r,
            spectrum: ProfileSpectrum::build(set, n, &f),
        })
    }

    pub fn coefficient(&self, k: &[i64]) -> Result<(Complex64, f64)> {
        self.spectrum.coefficient(k)
    }
}

/// `H_R^(0)` by the coarea formula: `int h(R t) d mu{dist < t}` as a midpoint
/// Stieltjes sum over `steps` shells up to the largest possible distance.
pub fn coarea_zero(set: &TorusSet, kernel: &KernelTable, r: f64, steps: usize) -> f64 {
    let t_end = (set.dimension() as f64).sqrt() / 2.0;
    let ts: Vec<f64> = (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect();
    let shells = set.shell_profile(&ts);
    let mut acc = 0.0;
    for i in 0..steps {
        let mass = shells[i + 1].value - shells[i].value;
        let mid = 0.5 * (ts[i] + ts[i + 1]);
        acc += mass * kernel.h_profile(r * mid);
    }
    acc
}

/// Empirical `F(alpha, beta, Omega)`: the smallest c with
/// `|chi^(k)| <= c |k|^-alpha` (0 < |k| <= k_max) and, for every R in the grid,
/// `|int psi(R dist) e(-k.x)| <= c |k|^-alpha` (0 < |k| < R, |k| <= k_max) and
/// `<= c R^-beta` at k = 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FConstant {
    pub alpha: f64,
    pub beta: f64,
    pub value: f64,
    pub from_coefficients: f64,
    pub from_profile_nonzero: f64,
    pub from_profile_zero: f64,
}

pub fn f_constant(
    set: &TorusSet,
    kernel: &KernelTable,
    alpha: f64,
    beta: f64,
    k_max: i64,
    r_grid: &[f64],
) -> Result<FConstant> {
    let d = set.dimension();
    if !(0.0..=(d as f64 + 1.0) / 2.0).contains(&alpha) {
        return Err(invalid("alpha", "must lie in [0, (d+1)/2]"));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(invalid("beta", "must lie in [0, 1]"));
    }
    let freqs = crate::pointsets::frequencies_in_ball(d, k_max as f64 + 0.5);
    let mut from_coefficients: f64 = 0.0;
    for k in &freqs {
        let kn = norm_i(k);
        if kn == 0.0 || kn > k_max as f64 {
            continue;
        }
        from_coefficients = from_coefficients.max(set.fourier_coefficient(k).norm() * kn.powf(alpha));
    }
    let mut nonzero: f64 = 0.0;
    let mut zero: f64 = 0.0;
    for &r in r_grid {
        // psi(R t) = 4 gamma I(R t / 2)
        let f = move |s: f64| 4.0 * kernel.h_profile(0.5 * r * s);
        let needed = default_resolution(r).max(((4 * k_max + 4) as usize).next_power_of_two());
        let spec = ProfileSpectrum::build(set, needed, &f);
        zero = zero.max(spec.coefficient(&vec![0; d])?.0.norm() * r.powf(beta));
        for k in &freqs {
            let kn = norm_i(k);
            if kn == 0.0 || kn >= r || kn > k_max as f64 {
                continue;
            }
            nonzero = nonzero.max(spec.coefficient(k)?.0.norm() * kn.powf(alpha));
        }
    }
    Ok(FConstant {
        alpha,
        beta,
        value: from_coefficients.max(nonzero).max(zero),
        from_coefficients,
        from_profile_nonzero: nonzero,
        from_profile_zero: zero,
    })
}

fn norm_i(k: &[i64]) -> f64 {
    k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt()
}
