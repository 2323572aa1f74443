//! Monotone piecewise-cubic Hermite interpolation on a uniform grid: centered
//! slopes with the Hyman filter, so monotone data stay monotone while smooth
//! data keep third-order accuracy.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformTable {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
    #[serde(skip)]
    slopes: Vec<f64>,
}

impl UniformTable {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Self {
        assert!(values.len() >= 2, "table needs at least two samples");
        assert!(step > 0.0);
        let slopes = pchip_slopes(step, &values);
        Self {
            start,
            step,
            values,
            slopes,
        }
    }

    /// Rebuild derived slopes after deserialization.
    pub fn rebuild(self) -> Self {
        Self::new(self.start, self.step, self.values)
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.start + self.step * i as f64)
    }

    /// Interpolated value; clamps to the end samples outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let u = (x - self.start) / self.step;
        if u <= 0.0 {
            return self.values[0];
        }
        if u >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let i = (u.floor() as usize).min(n - 2);
        let t = u - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1
    }
}

fn pchip_slopes(h: f64, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut m = vec![0.0; n];
    if n == 2 {
        m[0] = delta[0];
        m[1] = delta[0];
        return m;
    }
    for i in 1..n - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        m[i] = if a * b <= 0.0 {
            0.0
        } else {
            let c = 0.5 * (a + b);
            let cap = 3.0 * a.abs().min(b.abs());
            c.signum() * c.abs().min(cap)
        };
    }
    m[0] = end_slope(delta[0], delta[1]);
    m[n - 1] = end_slope(delta[n - 2], delta[n - 3]);
    m
}

fn end_slope(d0: f64, d1: f64) -> f64 {
    let s = (3.0 * d0 - d1) / 2.0;
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}
