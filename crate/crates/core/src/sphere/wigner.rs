//! Degree-ℓ rotation representations `D^ℓ(R)` on spherical harmonics.
//!
//! `D^ℓ(R) = exp(-i α J_z) exp(-i β J_y) exp(-i γ J_z)` for the ZYZ Euler
//! angles of `R = R_z(α) R_y(β) R_z(γ)`; the small matrix `exp(-i β J_y)` comes
//! from one eigendecomposition of `J_y` per degree.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Rotation = [[f64; 3]; 3];

/// ZYZ Euler angles `(α, β, γ)` with `R = R_z(α) R_y(β) R_z(γ)`.
pub fn euler_zyz(r: &Rotation) -> (f64, f64, f64) {
    let cb = r[2][2].clamp(-1.0, 1.0);
    let beta = cb.acos();
    let sb = (r[0][2].powi(2) + r[1][2].powi(2)).sqrt();
    if sb > 1e-12 {
        let alpha = r[1][2].atan2(r[0][2]);
        let gamma = r[2][1].atan2(-r[2][0]);
        (alpha, beta, gamma)
    } else if cb > 0.0 {
        (r[1][0].atan2(r[0][0]), 0.0, 0.0)
    } else {
        ((-r[1][0]).atan2(-r[0][0]), std::f64::consts::PI, 0.0)
    }
}

/// Eigendecomposition of `J_y` in the basis `|ℓ, m>`, `m = -ℓ..ℓ`.
#[derive(Debug, Clone)]
pub struct WignerSmall {
    pub degree: usize,
    vectors: DMatrix<Complex64>,
    eigenvalues: Vec<f64>,
}

impl WignerSmall {
    pub fn new(degree: usize) -> Self {
        let l = degree as f64;
        let n = 2 * degree + 1;
        let mut jy = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n - 1 {
            // <m+1| J_+ |m>, m = i - ℓ
            let m = i as f64 - l;
            let c = (l * (l + 1.0) - m * (m + 1.0)).sqrt();
            // J_y = (J_+ - J_-) / 2i
            jy[(i + 1, i)] = Complex64::new(0.0, -0.5 * c);
            jy[(i, i + 1)] = Complex64::new(0.0, 0.5 * c);
        }
        let eig = jy.symmetric_eigen();
        // The spectrum is -ℓ..ℓ; snapping removes eigensolver noise.
        let eigenvalues = eig.eigenvalues.iter().map(|v| v.round()).collect();
        Self {
            degree,
            vectors: eig.eigenvectors,
            eigenvalues,
        }
    }

    /// `d^ℓ(β) = exp(-i β J_y)`.
    pub fn small_d(&self, beta: f64) -> DMatrix<Complex64> {
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&lam| Complex64::from_polar(1.0, -beta * lam))
            .collect();
        let mut scaled = self.vectors.clone();
        for (j, p) in phases.iter().enumerate() {
            scaled.column_mut(j).iter_mut().for_each(|v| *v *= p);
        }
        scaled * self.vectors.adjoint()
    }

    /// `D^ℓ(R)`, indexed by `(m' + ℓ, m + ℓ)`.
    pub fn rotation(&self, r: &Rotation) -> DMatrix<Complex64> {
        let (alpha, beta, gamma) = euler_zyz(r);
        let l = self.degree as f64;
        let mut d = self.small_d(beta);
        let n = d.nrows();
        for row in 0..n {
            let mp = row as f64 - l;
            for col in 0..n {
                let m = col as f64 - l;
                d[(row, col)] *= Complex64::from_polar(1.0, -(mp * alpha + m * gamma));
            }
        }
        d
    }

    /// `D^ℓ(R)` after a unitarity check at `tol`.
    pub fn checked_rotation(&self, r: &Rotation, tol: f64) -> Result<DMatrix<Complex64>> {
        let d = self.rotation(r);
        let defect = unitarity_defect(&d);
        if defect > tol {
            return Err(Error::Numerical(format!(
                "degree {} representation not unitary: defect {defect:.3e}",
                self.degree
            )));
        }
        Ok(d)
    }
}

/// `max |D^H D - I|`.
pub fn unitarity_defect(d: &DMatrix<Complex64>) -> f64 {
    let p = d.adjoint() * d;
    let n = p.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - want).norm());
        }
    }
    worst
}

/// `sum_{m=-ℓ..ℓ} e^{i m θ}`.
pub fn character(degree: usize, theta: f64) -> f64 {
    let l = degree as i64;
    (-l..=l).map(|m| (m as f64 * theta).cos()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rz(a: f64) -> Rotation {
        [[a.cos(), -a.sin(), 0.0], [a.sin(), a.cos(), 0.0], [0.0, 0.0, 1.0]]
    }

    fn ry(b: f64) -> Rotation {
        [[b.cos(), 0.0, b.sin()], [0.0, 1.0, 0.0], [-b.sin(), 0.0, b.cos()]]
    }

    fn mul(a: &Rotation, b: &Rotation) -> Rotation {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        out
    }

    #[test]
    fn euler_angles_round_trip() {
        let (a, b, g) = (0.7, 1.1, -2.3);
        let r = mul(&mul(&rz(a), &ry(b)), &rz(g));
        let (a2, b2, g2) = euler_zyz(&r);
        assert!((a - a2).abs() < 1e-12 && (b - b2).abs() < 1e-12 && (g - g2).abs() < 1e-12);
    }

    #[test]
    fn degree_one_small_d() {
        let w = WignerSmall::new(1);
        let b: f64 = 0.9;
        let d = w.small_d(b);
        // d^1_{00} = cos β, d^1_{11} = (1 + cos β)/2
        assert!((d[(1, 1)].re - b.cos()).abs() < 1e-13);
        assert!((d[(2, 2)].re - (1.0 + b.cos()) / 2.0).abs() < 1e-13);
        assert!(d.iter().all(|v| v.im.abs() < 1e-13));
    }

    #[test]
    fn representation_is_homomorphic() {
        let w = WignerSmall::new(3);
        let r1 = mul(&ry(0.4), &rz(1.3));
        let r2 = mul(&rz(-0.8), &ry(2.0));
        let lhs = w.rotation(&mul(&r1, &r2));
        let rhs = w.rotation(&r1) * w.rotation(&r2);
        assert!((lhs - rhs).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn traces_match_characters() {
        let w = WignerSmall::new(5);
        let t = 2.1;
        let d = w.rotation(&ry(t));
        assert!((d.trace().re - character(5, t)).abs() < 1e-11);
    }
}
