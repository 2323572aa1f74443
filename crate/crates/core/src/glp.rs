//! Good lattice points: congruence sums of `Phi`, the averaging certificate and
//! the search over generating vectors `g`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pointsets::{is_prime, punctured_frequencies};
use crate::stats::sorted_sum;
use crate::torus::ChainSystem;

/// Largest `(m-1)^d` accepted by the exhaustive strategy.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Strategy {
    Exhaustive,
    Random { samples: usize, seed: u64 },
    KorobovRank1,
}

/// `Phi(k)` for all `0 < |k| < m`, computed once.
#[derive(Debug, Clone)]
pub struct PhiTable {
    pub m: u64,
    pub dimension: usize,
    pub frequencies: Vec<Vec<i64>>,
    pub phi: Vec<f64>,
}

impl PhiTable {
    pub fn new(m: u64, chains: &ChainSystem) -> Result<Self> {
        if !is_prime(m) {
            return Err(Error::NotPrime(m));
        }
        let d = chains.dimension;
        let frequencies = punctured_frequencies(d, m as f64);
        let phi = frequencies.iter().map(|k| chains.phi_int(k)).collect();
        Ok(Self {
            m,
            dimension: d,
            frequencies,
            phi,
        })
    }

    /// `(m-1)^{-1} sum_{0<|k|<m} Phi(k)`.
    pub fn average(&self) -> f64 {
        sorted_sum(&self.phi) / (self.m - 1) as f64
    }

    pub fn total(&self) -> f64 {
        sorted_sum(&self.phi)
    }

    fn check_g(&self, g: &[u64]) -> Result<()> {
        if g.len() != self.dimension {
            return Err(invalid("g", "length differs from the dimension"));
        }
        if g.iter().any(|&v| v == 0 || v >= self.m) {
            return Err(invalid("g", "entries must lie in [1, m-1]"));
        }
        Ok(())
    }

    /// `sum_{0<|k|<m, g.k = 0 mod m} Phi(k)`.
    pub fn congruence_sum(&self, g: &[u64]) -> Result<f64> {
        self.check_g(g)?;
        let m = self.m as i128;
        let terms: Vec<f64> = self
            .frequencies
            .iter()
            .zip(&self.phi)
            .filter(|(k, _)| {
                let s: i128 = k.iter().zip(g).map(|(&a, &b)| a as i128 * b as i128).sum();
                s.rem_euclid(m) == 0
            })
            .map(|(_, p)| *p)
            .collect();
        Ok(sorted_sum(&terms))
    }

    /// Sums for every class representative `g = (1, h_2, ..., h_d)`; the sum
    /// of `g` equals that of `c g` for any unit `c`, so these cover all `g`.
    /// Indexed by `(h_2 - 1) + (m - 1)(h_3 - 1) + ...`.
    pub fn class_sums(&self) -> Vec<f64> {
        let m = self.m as i64;
        let d = self.dimension;
        let classes = (self.m - 1).pow(d as u32 - 1) as usize;
        let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); classes];
        let inv = |a: i64| mod_inverse(a.rem_euclid(m), m);
        for (k, &p) in self.frequencies.iter().zip(&self.phi) {
            match d {
                1 => {
                    if k[0].rem_euclid(m) == 0 {
                        buckets[0].push(p);
                    }
                }
                2 => {
                    // k1 + h k2 = 0
                    let (k1, k2) = (k[0].rem_euclid(m), k[1].rem_euclid(m));
                    if k2 == 0 {
                        if k1 == 0 {
                            buckets.iter_mut().for_each(|b| b.push(p));
                        }
                        continue;
                    }
                    let h = (-k1 * inv(k2)).rem_euclid(m);
                    if h != 0 {
                        buckets[(h - 1) as usize].push(p);
                    }
                }
                _ => {
                    // k1 + h2 k2 + h3 k3 = 0
                    let (k1, k2, k3) = (k[0].rem_euclid(m), k[1].rem_euclid(m), k[2].rem_euclid(m));
                    for h2 in 1..m {
                        let rest = (k1 + h2 * k2).rem_euclid(m);
                        if k3 == 0 {
                            if rest == 0 {
                                for h3 in 1..m {
                                    buckets[(h2 - 1 + (m - 1) * (h3 - 1)) as usize].push(p);
                                }
                            }
                            continue;
                        }
                        let h3 = (-rest * inv(k3)).rem_euclid(m);
                        if h3 != 0 {
                            buckets[(h2 - 1 + (m - 1) * (h3 - 1)) as usize].push(p);
                        }
                    }
                }
            }
        }
        buckets.iter().map(|b| sorted_sum(b)).collect()
    }

    fn class_of(&self, idx: usize) -> Vec<u64> {
        let mut g = vec![1u64];
        let mut rest = idx as u64;
        for _ in 1..self.dimension {
            g.push(rest % (self.m - 1) + 1);
            rest /= self.m - 1;
        }
        g
    }

    fn class_index(&self, g: &[u64]) -> usize {
        let m = self.m as i64;
        let unit = mod_inverse(g[0] as i64, m);
        let mut idx = 0usize;
        let mut scale = 1usize;
        for &gi in &g[1..] {
            let h = (gi as i64 * unit).rem_euclid(m);
            idx += (h as usize - 1) * scale;
            scale *= self.m as usize - 1;
        }
        idx
    }

    /// Congruence sums for every `g` in `[1, m-1]^d` (lexicographic order).
    pub fn full_table(&self) -> Result<Vec<(Vec<u64>, f64)>> {
        let count = (self.m - 1).pow(self.dimension as u32);
        if count > EXHAUSTIVE_LIMIT {
            return Err(Error::Infeasible(format!("(m-1)^d = {count} exceeds {EXHAUSTIVE_LIMIT}")));
        }
        let classes = self.class_sums();
        let mut out = Vec::with_capacity(count as usize);
        let mut g = vec![1u64; self.dimension];
        loop {
            out.push((g.clone(), classes[self.class_index(&g)]));
            let mut axis = self.dimension;
            loop {
                if axis == 0 {
                    return Ok(out);
                }
                axis -= 1;
                if g[axis] < self.m - 1 {
                    g[axis] += 1;
                    break;
                }
                g[axis] = 1;
            }
        }
    }
}

fn mod_pow(mut base: i64, mut exp: i64, m: i64) -> i64 {
    let mut acc = 1i64;
    base = base.rem_euclid(m);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = (acc as i128 * base as i128 % m as i128) as i64;
        }
        base = (base as i128 * base as i128 % m as i128) as i64;
        exp >>= 1;
    }
    acc
}

/// Inverse modulo a prime `m` (Fermat).
fn mod_inverse(a: i64, m: i64) -> i64 {
    mod_pow(a, m - 2, m)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlpCertificate {
    pub m: u64,
    pub dimension: usize,
    pub g: Vec<u64>,
    pub value: f64,
    pub average: f64,
    pub strategy: Strategy,
    pub candidates: usize,
    /// `value / average`.
    pub ratio: f64,
    /// `average * m / log^d m` and `value * m / log^d m`.
    pub average_constant: f64,
    pub value_constant: f64,
}

impl GlpCertificate {
    pub fn beats_average(&self) -> bool {
        self.value <= self.average
    }
}

/// `sum_{0<|k|<m, g.k = 0 mod m} Phi(k)`.
pub fn congruence_sum(g: &[u64], m: u64, chains: &ChainSystem) -> Result<f64> {
    PhiTable::new(m, chains)?.congruence_sum(g)
}

pub fn search(m: u64, chains: &ChainSystem, strategy: &Strategy) -> Result<GlpCertificate> {
    let table = PhiTable::new(m, chains)?;
    search_with(&table, strategy)
}

pub fn search_with(table: &PhiTable, strategy: &Strategy) -> Result<GlpCertificate> {
    let m = table.m;
    let d = table.dimension;
    let (g, value, candidates) = match strategy {
        Strategy::Exhaustive => {
            let count = (m - 1).pow(d as u32);
            if count > EXHAUSTIVE_LIMIT {
                return Err(Error::Infeasible(format!(
                    "exhaustive search over (m-1)^d = {count} vectors exceeds {EXHAUSTIVE_LIMIT}"
                )));
            }
            let sums = table.class_sums();
            let (idx, v) = argmin(&sums);
            (table.class_of(idx), v, count as usize)
        }
        Strategy::Random { samples, seed } => {
            if *samples == 0 {
                return Err(invalid("samples", "must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let gs: Vec<Vec<u64>> = (0..*samples)
                .map(|_| (0..d).map(|_| rng.random_range(1..m)).collect())
                .collect();
            let sums: Vec<f64> = gs.iter().map(|g| table.congruence_sum(g)).collect::<Result<_>>()?;
            let (idx, v) = argmin(&sums);
            (gs[idx].clone(), v, *samples)
        }
        Strategy::KorobovRank1 => {
            let gs: Vec<Vec<u64>> = (1..m)
                .map(|a| (0..d).map(|j| mod_pow(a as i64, j as i64, m as i64) as u64).collect())
                .collect();
            let sums: Vec<f64> = gs.iter().map(|g| table.congruence_sum(g)).collect::<Result<_>>()?;
            let (idx, v) = argmin(&sums);
            (gs[idx].clone(), v, gs.len())
        }
    };
    let average = table.average();
    let scale = m as f64 / (m as f64).ln().powi(d as i32);
    Ok(GlpCertificate {
        m,
        dimension: d,
        g,
        value,
        average,
        strategy: strategy.clone(),
        candidates,
        ratio: value / average,
        average_constant: average * scale,
        value_constant: value * scale,
    })
}

/// First index of the minimum.
fn argmin(v: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &x) in v.iter().enumerate() {
        if x < best.1 {
            best = (i, x);
        }
    }
    best
}
