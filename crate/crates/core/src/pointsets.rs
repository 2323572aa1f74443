//! Point families on T^d, their Weyl sums, true discrepancies and the
//! Schmidt diophantine sum.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::stats::pairwise_sum;
use crate::torus::TorusSet;

/// Generator descriptor, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PointSpec {
    Lattice { d: usize, m: usize },
    Kronecker { x: Vec<f64>, m: usize },
    Korobov { g: Vec<u64>, m: u64 },
    Explicit { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone)]
pub struct PointSet {
    pub spec: PointSpec,
    pub dimension: usize,
    pub points: Vec<Vec<f64>>,
}

/// Named irrational constants accepted in generator descriptors.
pub fn named_constant(name: &str) -> Option<f64> {
    Some(match name {
        "sqrt2-1" => std::f64::consts::SQRT_2 - 1.0,
        "sqrt3-1" => 3f64.sqrt() - 1.0,
        "sqrt5-2" => 5f64.sqrt() - 2.0,
        "golden-1" => (5f64.sqrt() - 1.0) / 2.0,
        _ => return None,
    })
}

pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// Exact integer `d`-th root of `m`, if there is one.
pub fn integer_root(m: usize, d: usize) -> Option<usize> {
    let guess = (m as f64).powf(1.0 / d as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&n| n.checked_pow(d as u32) == Some(m))
}

/// The grid `m^{-1/d} Z^d` restricted to the torus (`m` points).
pub fn lattice(d: usize, m: usize) -> Result<PointSet> {
    if !(1..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d, "1, 2, 3"));
    }
    let n = integer_root(m, d).ok_or(Error::NotPerfectPower { m, d })?;
    let points = (0..m)
        .map(|idx| {
            crate::fft::unflatten(idx, n, d)
                .into_iter()
                .map(|j| j as f64 / n as f64)
                .collect()
        })
        .collect();
    Ok(PointSet {
        spec: PointSpec::Lattice { d, m },
        dimension: d,
        points,
    })
}

/// `{j x mod 1}` for `j = 1..=m`.
pub fn kronecker(x: &[f64], m: usize) -> Result<PointSet> {
    let d = x.len();
    if !(1..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d, "1, 2, 3"));
    }
    if m == 0 {
        return Err(invalid("m", "must be positive"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(invalid("x", "must be finite"));
    }
    let points = (1..=m)
        .map(|j| x.iter().map(|v| (j as f64 * v).rem_euclid(1.0)).collect())
        .collect();
    Ok(PointSet {
        spec: PointSpec::Kronecker { x: x.to_vec(), m },
        dimension: d,
        points,
    })
}

/// `{j g / m mod 1}` for `j = 1..=m`, `m` prime.
pub fn korobov(g: &[u64], m: u64) -> Result<PointSet> {
    let d = g.len();
    if !(1..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d, "1, 2, 3"));
    }
    if !is_prime(m) {
        return Err(Error::NotPrime(m));
    }
    if g.iter().any(|&v| v == 0 || v >= m) {
        return Err(invalid("g", "entries must lie in [1, m-1]"));
    }
    let points = (1..=m)
        .map(|j| g.iter().map(|&gi| ((j * gi) % m) as f64 / m as f64).collect())
        .collect();
    Ok(PointSet {
        spec: PointSpec::Korobov { g: g.to_vec(), m },
        dimension: d,
        points,
    })
}

pub fn explicit(points: Vec<Vec<f64>>) -> Result<PointSet> {
    let d = points.first().map_or(0, |p| p.len());
    if !(1..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d, "1, 2, 3"));
    }
    if points.iter().any(|p| p.len() != d || p.iter().any(|v| !(0.0..1.0).contains(v))) {
        return Err(invalid("points", "coordinates must lie in [0, 1) with equal dimension"));
    }
    Ok(PointSet {
        spec: PointSpec::Explicit {
            points: points.clone(),
        },
        dimension: d,
        points,
    })
}

impl PointSet {
    pub fn from_spec(spec: &PointSpec) -> Result<Self> {
        match spec {
            PointSpec::Lattice { d, m } => lattice(*d, *m),
            PointSpec::Kronecker { x, m } => kronecker(x, *m),
            PointSpec::Korobov { g, m } => korobov(g, *m),
            PointSpec::Explicit { points } => explicit(points.clone()),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Psi(k) = |m^{-1} sum_j e^{2 pi i k.x_j}|`. Exact 0/1 for lattices and
    /// Korobov sets, closed form for Kronecker orbits.
    pub fn weyl(&self, k: &[i64]) -> f64 {
        match &self.spec {
            PointSpec::Lattice { d, m } => {
                let n = integer_root(*m, *d).expect("validated") as i64;
                if k.iter().all(|v| v.rem_euclid(n) == 0) {
                    1.0
                } else {
                    0.0
                }
            }
            PointSpec::Korobov { g, m } => {
                let s: i128 = g.iter().zip(k).map(|(&gi, &ki)| gi as i128 * ki as i128).sum();
                if s.rem_euclid(*m as i128) == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            PointSpec::Kronecker { x, m } => {
                let theta: f64 = x.iter().zip(k).map(|(xi, &ki)| xi * ki as f64).sum();
                dirichlet_ratio(theta, *m)
            }
            PointSpec::Explicit { .. } => {
                let re: Vec<f64> = self.points.iter().map(|p| (2.0 * PI * dot_i(k, p)).cos()).collect();
                let im: Vec<f64> = self.points.iter().map(|p| (2.0 * PI * dot_i(k, p)).sin()).collect();
                let m = self.points.len() as f64;
                (pairwise_sum(&re).powi(2) + pairwise_sum(&im).powi(2)).sqrt() / m
            }
        }
    }

    pub fn weyl_spectrum(&self, r: f64) -> Result<WeylSpectrum> {
        if !(r >= 1.0) {
            return Err(invalid("R", "must be at least 1"));
        }
        let freqs = punctured_frequencies(self.dimension, r);
        let values: Vec<f64> = freqs.par_iter().map(|k| self.weyl(k)).collect();
        Ok(WeylSpectrum::new(r, freqs, values))
    }

    /// Points of the set, counted under the set's membership convention.
    pub fn count_inside(&self, set: &TorusSet) -> usize {
        self.points.par_iter().filter(|p| set.contains(p)).count()
    }

    /// `|mu(Omega) - #{x_j in Omega} / m|`.
    pub fn true_discrepancy(&self, set: &TorusSet) -> f64 {
        let inside = self.count_inside(set) as f64;
        (set.measure() - inside / self.points.len() as f64).abs()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
            points.push(row.map_err(|e| invalid("points", format!("bad CSV value: {e}")))?);
        }
        explicit(points)
    }
}

fn dot_i(k: &[i64], p: &[f64]) -> f64 {
    k.iter().zip(p).map(|(&a, b)| a as f64 * b).sum()
}

/// Distance to the nearest integer.
pub fn nearest_int_dist(v: f64) -> f64 {
    (v - v.round()).abs()
}

/// `|sum_{j=1}^m e^{2 pi i j theta}| / m`.
fn dirichlet_ratio(theta: f64, m: usize) -> f64 {
    let t = theta - theta.round();
    let den = (PI * t).sin();
    if den.abs() < 1e-300 {
        return 1.0;
    }
    let v = ((PI * m as f64 * t).sin() / (m as f64 * den)).abs();
    v.min(1.0)
}

/// Integer vectors with `|k| < r`, in lexicographic order.
pub fn frequencies_in_ball(d: usize, r: f64) -> Vec<Vec<i64>> {
    let b = r.ceil() as i64;
    let r2 = r * r;
    let mut out = Vec::new();
    let mut k = vec![-b; d];
    loop {
        let n2: f64 = k.iter().map(|&v| (v * v) as f64).sum();
        if n2 < r2 {
            out.push(k.clone());
        }
        let mut axis = d;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            if k[axis] < b {
                k[axis] += 1;
                break;
            }
            k[axis] = -b;
        }
    }
}

/// `0 < |k| < r`.
pub fn punctured_frequencies(d: usize, r: f64) -> Vec<Vec<i64>> {
    frequencies_in_ball(d, r)
        .into_iter()
        .filter(|k| k.iter().any(|&v| v != 0))
        .collect()
}

/// `Psi(k)` over `0 < |k| < R`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeylSpectrum {
    pub r: f64,
    pub frequencies: Vec<Vec<i64>>,
    pub values: Vec<f64>,
    #[serde(skip)]
    index: HashMap<Vec<i64>, usize>,
}

impl WeylSpectrum {
    pub fn new(r: f64, frequencies: Vec<Vec<i64>>, values: Vec<f64>) -> Self {
        let index = frequencies.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Self {
            r,
            frequencies,
            values,
            index,
        }
    }

    pub fn get(&self, k: &[i64]) -> Option<f64> {
        self.index.get(k).map(|&i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, f64)> {
        self.frequencies.iter().zip(self.values.iter().copied())
    }
}

/// `sum_{0<|k|<R} |k|^{-d} ||k.x||^{-1}`; a vanishing `||k.x||` is reported
/// as a resonance.
pub fn schmidt_sum(x: &[f64], r: f64) -> Result<f64> {
    let d = x.len();
    if !(1..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d, "1, 2, 3"));
    }
    let freqs = punctured_frequencies(d, r);
    let mut terms = Vec::with_capacity(freqs.len());
    for k in &freqs {
        let dist = nearest_int_dist(dot_i(k, x));
        if dist < 1e-12 {
            return Err(Error::Resonance(k.clone()));
        }
        let kn = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
        terms.push(kn.powi(-(d as i32)) / dist);
    }
    Ok(pairwise_sum(&terms))
}
