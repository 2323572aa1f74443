//! The generalized Erdős–Turán bound and the polytope-family bound, with the
//! corollaries' choices of R.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernel::KernelTable;
use crate::pointsets::{PointSet, PointSpec, WeylSpectrum};
use crate::stats::sorted_sum;
use crate::torus::{ChainSystem, HSpectrum, SetSpec, TorusSet, MEMBERSHIP_CONVENTION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub alpha: f64,
    pub beta: f64,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Breakdown {
    /// `|H_R^(0)|`.
    pub h0_term: f64,
    /// `sum (|chi^(k)| + |H_R^(k)|) Psi(k)` over `0 < |k| < R`.
    pub weyl_term: f64,
    /// Frequencies with `Psi(k) > 0`.
    pub contributing: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub set: SetSpec,
    pub points: String,
    pub point_count: usize,
    pub r: f64,
    pub bound: f64,
    /// Quadrature uncertainty of the bound (from the Ĥ_R refinement).
    pub uncertainty: f64,
    pub breakdown: Breakdown,
    pub true_discrepancy: Option<f64>,
    pub exponents: Option<Exponents>,
    pub membership: String,
}

impl DiscrepancyReport {
    /// `bound + uncertainty >= true discrepancy` (vacuous without an oracle).
    pub fn is_valid(&self) -> bool {
        self.true_discrepancy
            .is_none_or(|t| self.bound + self.uncertainty >= t)
    }
}

/// Short text form of a generator descriptor for reports.
pub fn describe_points(spec: &PointSpec) -> String {
    match spec {
        PointSpec::Lattice { d, m } => format!("lattice(d={d}, m={m})"),
        PointSpec::Kronecker { x, m } => format!("kronecker(x={x:?}, m={m})"),
        PointSpec::Korobov { g, m } => format!("korobov(g={g:?}, m={m})"),
        PointSpec::Explicit { points } => format!("explicit({} points)", points.len()),
    }
}

/// `|H_R^(0)| + sum_{0<|k|<R} (|chi^(k)| + |H_R^(k)|) Psi(k)`.
pub fn et_bound(set: &TorusSet, points: &PointSet, kernel: &KernelTable, r: f64) -> Result<DiscrepancyReport> {
    if r < 4.0 {
        return Err(invalid("R", "must be at least 4"));
    }
    let h = HSpectrum::new(set, kernel, r)?;
    et_bound_with(set, points, &h)
}

pub fn et_bound_with(set: &TorusSet, points: &PointSet, h: &HSpectrum) -> Result<DiscrepancyReport> {
    let d = set.dimension();
    if points.dimension != d {
        return Err(invalid("points", "dimension differs from the set"));
    }
    let r = h.r;
    let spectrum = points.weyl_spectrum(r)?;
    et_bound_from_spectrum(set, points, h, &spectrum)
}

pub fn et_bound_from_spectrum(
    set: &TorusSet,
    points: &PointSet,
    h: &HSpectrum,
    spectrum: &WeylSpectrum,
) -> Result<DiscrepancyReport> {
    let d = set.dimension();
    let r = h.r;
    let (h0, h0_unc) = h.coefficient(&vec![0; d])?;
    let active: Vec<(&Vec<i64>, f64)> = spectrum
        .iter()
        .filter(|(k, psi)| *psi > 0.0 && norm_i(k) < r)
        .collect();
    let terms: Vec<Result<(f64, f64)>> = active
        .par_iter()
        .map(|(k, psi)| {
            let chi: Complex64 = set.fourier_coefficient(k);
            let (hk, unc) = h.coefficient(k)?;
            Ok(((chi.norm() + hk.norm()) * psi, unc * psi))
        })
        .collect();
    let mut values = Vec::with_capacity(terms.len());
    let mut uncs = Vec::with_capacity(terms.len());
    for t in terms {
        let (v, u) = t?;
        values.push(v);
        uncs.push(u);
    }
    let weyl_term = sorted_sum(&values);
    let uncertainty = h0_unc + sorted_sum(&uncs);
    Ok(DiscrepancyReport {
        set: set.spec(),
        points: describe_points(&points.spec),
        point_count: points.len(),
        r,
        bound: h0.norm() + weyl_term,
        uncertainty,
        breakdown: Breakdown {
            h0_term: h0.norm(),
            weyl_term,
            contributing: active.len(),
        },
        true_discrepancy: Some(points.true_discrepancy(set)),
        exponents: None,
        membership: MEMBERSHIP_CONVENTION.to_string(),
    })
}

fn norm_i(k: &[i64]) -> f64 {
    k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt()
}

/// Which corollary's choice of R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum RRule {
    /// `R = m^{1/(d+beta-alpha)}`.
    Lattice,
    /// `R = m^{1/(d+beta-alpha)} log^{-(d+1+eps)/(d+beta-alpha)} m`.
    Kronecker { epsilon: f64 },
    /// `R = m^{1/(2+delta)} log^{-2/(2+delta)} m`.
    Sphere { delta: f64 },
    /// `R = m`.
    Glp,
}

pub fn optimal_r(rule: RRule, m: usize, d: usize, alpha: f64, beta: f64) -> Result<f64> {
    if m < 2 {
        return Err(invalid("m", "must be at least 2"));
    }
    let mf = m as f64;
    let e = d as f64 + beta - alpha;
    match rule {
        RRule::Lattice | RRule::Kronecker { .. } if e <= 0.0 => Err(invalid("alpha", "d + beta - alpha must be positive")),
        RRule::Lattice => Ok(mf.powf(1.0 / e)),
        RRule::Kronecker { epsilon } => {
            Ok(mf.powf(1.0 / e) * mf.ln().powf(-(d as f64 + 1.0 + epsilon) / e))
        }
        RRule::Sphere { delta } => {
            if !(delta > 0.0 && delta <= 1.0) {
                return Err(invalid("delta", "must lie in (0, 1]"));
            }
            Ok(mf.powf(1.0 / (2.0 + delta)) * mf.ln().powf(-2.0 / (2.0 + delta)))
        }
        RRule::Glp => Ok(mf),
    }
}

/// Default grid for the R search: powers of two from 4 to 128.
pub fn default_r_grid() -> Vec<f64> {
    (2..=7).map(|e| (1u64 << e) as f64).collect()
}

/// Evaluates the bound on every R of `grid` (plus `formula_r`, if given and at
/// least 4) and returns all reports with the index of the smallest bound.
pub fn grid_search_r(
    set: &TorusSet,
    points: &PointSet,
    kernel: &KernelTable,
    grid: &[f64],
    formula_r: Option<f64>,
) -> Result<(usize, Vec<DiscrepancyReport>)> {
    let mut rs: Vec<f64> = grid.iter().copied().filter(|r| *r >= 4.0).collect();
    if let Some(f) = formula_r.filter(|r| *r >= 4.0) {
        rs.push(f);
    }
    if rs.is_empty() {
        return Err(invalid("grid", "no R >= 4"));
    }
    let reports: Vec<DiscrepancyReport> = rs
        .iter()
        .map(|&r| et_bound(set, points, kernel, r))
        .collect::<Result<_>>()?;
    let best = reports
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.bound.total_cmp(&b.1.bound))
        .map(|(i, _)| i)
        .expect("non-empty");
    Ok((best, reports))
}

/// `R^{-1} + sum_{0<|k|<R} Phi(k) Psi(k)`; the theorem's constant is not
/// included.
pub fn polytope_family_bound(chains: &ChainSystem, spectrum: &WeylSpectrum, r: f64) -> Result<f64> {
    if spectrum.r < r {
        return Err(invalid("spectrum", "does not cover |k| < R"));
    }
    let terms: Vec<f64> = spectrum
        .iter()
        .filter(|(k, psi)| *psi > 0.0 && norm_i(k) < r)
        .map(|(k, psi)| chains.phi_int(k) * psi)
        .collect();
    Ok(1.0 / r + sorted_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_rule_exponent() {
        let r = optimal_r(RRule::Lattice, 4096, 2, 1.0, 1.0).unwrap();
        assert!((r - 64.0).abs() < 1e-9);
        assert!(optimal_r(RRule::Lattice, 4096, 1, 2.0, 0.0).is_err());
    }

    #[test]
    fn kronecker_rule_formula() {
        let m: f64 = 10000.0;
        let r = optimal_r(RRule::Kronecker { epsilon: 0.1 }, 10000, 2, 1.5, 1.0).unwrap();
        let want = m.powf(1.0 / 1.5) * m.ln().powf(-3.1 / 1.5);
        assert!((r - want).abs() < 1e-9 * want);
    }

    #[test]
    fn empty_spectrum_gives_inverse_r() {
        let chains = ChainSystem::coordinate(2).unwrap();
        let spec = WeylSpectrum::new(10.0, vec![vec![1, 0]], vec![0.0]);
        assert_eq!(polytope_family_bound(&chains, &spec, 10.0).unwrap(), 0.1);
    }
}
