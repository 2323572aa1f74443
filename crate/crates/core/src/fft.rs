//! Dense periodic grids on T^d with FFT in every axis.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// Row-major index of a grid point `j` (last axis fastest).
pub fn flat_index(j: &[usize], n: usize) -> usize {
    j.iter().fold(0, |acc, &v| acc * n + v)
}

/// Decompose a flat index into per-axis indices.
pub fn unflatten(mut idx: usize, n: usize, d: usize) -> Vec<usize> {
    let mut j = vec![0; d];
    for a in (0..d).rev() {
        j[a] = idx % n;
        idx /= n;
    }
    j
}

/// In-place unnormalized d-dimensional FFT over an `n^d` row-major array.
pub fn fft_nd(data: &mut [Complex64], n: usize, d: usize, direction: FftDirection) {
    assert_eq!(data.len(), n.pow(d as u32));
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(n, direction);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let outer = data.len() / (n * stride);
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (t, l) in line.iter_mut().enumerate() {
                    *l = data[base + t * stride];
                }
                fft.process(&mut line);
                for (t, l) in line.iter().enumerate() {
                    data[base + t * stride] = *l;
                }
            }
        }
    }
}

/// Wrap an integer frequency into its FFT bin.
pub fn bin(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Samples of a periodic function on the grid `j/n`, transformed so that
/// `coefficient(k)` is the trapezoidal approximation of its k-th Fourier
/// coefficient.
#[derive(Debug, Clone)]
pub struct GridSpectrum {
    pub n: usize,
    pub d: usize,
    data: Vec<Complex64>,
}

impl GridSpectrum {
    pub fn from_samples(n: usize, d: usize, samples: Vec<f64>) -> Self {
        let mut data: Vec<Complex64> = samples.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut data, n, d, FftDirection::Forward);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        Self { n, d, data }
    }

    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        let idx = k.iter().fold(0, |acc, &v| acc * self.n + bin(v, self.n));
        self.data[idx]
    }
}

/// Evaluate a trigonometric polynomial on the grid `j/n` from its coefficient
/// list. Returns real parts in row-major order.
pub fn synthesize(n: usize, d: usize, coeffs: &[(Vec<i64>, Complex64)]) -> Vec<f64> {
    let mut data = vec![Complex64::new(0.0, 0.0); n.pow(d as u32)];
    for (k, c) in coeffs {
        let idx = k.iter().fold(0, |acc, &v| acc * n + bin(v, n));
        data[idx] += *c;
    }
    fft_nd(&mut data, n, d, FftDirection::Inverse);
    data.into_iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn recovers_coefficients_of_trig_polynomial() {
        let n = 16;
        let mut samples = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
                samples.push(1.5 + (2.0 * PI * (2.0 * x - 3.0 * y)).cos());
            }
        }
        let s = GridSpectrum::from_samples(n, 2, samples);
        assert!((s.coefficient(&[0, 0]).re - 1.5).abs() < 1e-14);
        assert!((s.coefficient(&[2, -3]).re - 0.5).abs() < 1e-14);
        assert!((s.coefficient(&[-2, 3]).re - 0.5).abs() < 1e-14);
        assert!(s.coefficient(&[1, 1]).norm() < 1e-14);
    }

    #[test]
    fn synthesis_matches_direct_sum() {
        let coeffs = vec![
            (vec![0, 0], Complex64::new(0.25, 0.0)),
            (vec![1, -2], Complex64::new(0.1, 0.2)),
            (vec![-1, 2], Complex64::new(0.1, -0.2)),
        ];
        let n = 8;
        let vals = synthesize(n, 2, &coeffs);
        for (idx, v) in vals.iter().enumerate() {
            let j = unflatten(idx, n, 2);
            let x = [j[0] as f64 / n as f64, j[1] as f64 / n as f64];
            let direct: f64 = coeffs
                .iter()
                .map(|(k, c)| {
                    let ph = 2.0 * PI * (k[0] as f64 * x[0] + k[1] as f64 * x[1]);
                    (c * Complex64::new(ph.cos(), ph.sin())).re
                })
                .sum();
            assert!((v - direct).abs() < 1e-14);
        }
    }
}
