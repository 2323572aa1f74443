//! Independent oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive Gauss-Kronrod (7/15) with bisection down to `abs_tol`.
pub fn adaptive<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Complex64 {
    fn rec<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Complex64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth > 40 || (b - a).abs() < 1e-14 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    rec(f, a, b, abs_tol, 0)
}

pub fn adaptive_real<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> f64 {
    adaptive(&|x| Complex64::new(f(x), 0.0), a, b, abs_tol).re
}

/// `int_a^b e^{-2 pi i w x} dx` in closed form.
fn exp_segment(w: f64, a: f64, b: f64) -> Complex64 {
    let len = b - a;
    let z = 2.0 * PI * w;
    if (z * len).abs() < 1e-6 {
        let mid = Complex64::from_polar(1.0, -z * 0.5 * (a + b));
        return mid * len * (1.0 - (z * len).powi(2) / 24.0);
    }
    (Complex64::from_polar(1.0, -z * a) - Complex64::from_polar(1.0, -z * b)) / Complex64::new(0.0, z)
}

/// x-extent of the convex hull of `pts` on the line `y`: the hull meets the
/// line in the hull of the intersections of all vertex segments with it.
fn slice(pts: &[Vec<f64>], y: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in pts {
        for q in pts {
            let (y0, y1) = (p[1], q[1]);
            if (y0 - y).signum() * (y1 - y).signum() > 0.0 {
                continue;
            }
            let x = if (y1 - y0).abs() < 1e-300 {
                lo = lo.min(p[0].min(q[0]));
                hi = hi.max(p[0].max(q[0]));
                continue;
            } else {
                p[0] + (q[0] - p[0]) * (y - y0) / (y1 - y0)
            };
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// `int_{hull(pts)} e^{-2 pi i xi.x} dx` in the plane: closed form in x,
/// adaptive quadrature in y between the vertex heights.
pub fn polygon_ft(pts: &[Vec<f64>], xi: [f64; 2], abs_tol: f64) -> Complex64 {
    let mut ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let f = |y: f64| match slice(pts, y) {
        Some((a, b)) => Complex64::from_polar(1.0, -2.0 * PI * xi[1] * y) * exp_segment(xi[0], a, b),
        None => Complex64::new(0.0, 0.0),
    };
    let pieces = (ys.len() - 1).max(1) as f64;
    ys.windows(2).map(|w| adaptive(&f, w[0], w[1], abs_tol / pieces)).sum()
}

/// `|mu(Omega) - fraction inside|` by a plain loop over points.
pub fn brute_discrepancy(points: &[Vec<f64>], inside: impl Fn(&[f64]) -> bool, measure: f64) -> f64 {
    let mut count = 0usize;
    for p in points {
        if inside(p) {
            count += 1;
        }
    }
    (measure - count as f64 / points.len() as f64).abs()
}

/// `Phi` for the coordinate family in d = 2 written out by hand: chains
/// R^2 > {x1 = 0} and R^2 > {x2 = 0}.
pub fn phi_coordinate_2d(k: [i64; 2]) -> f64 {
    let cap = |p: f64| if 2.0 * PI * p <= 1.0 { 1.0 } else { 1.0 / (2.0 * PI * p) };
    let full = cap(((k[0] * k[0] + k[1] * k[1]) as f64).sqrt());
    // the line x1 = 0 keeps the second coordinate, and vice versa
    full * cap(k[1].abs() as f64) + full * cap(k[0].abs() as f64)
}
