//! The positive band-limited kernel behind the majorant construction.
//!
//! Starting from a smooth radial bump `m` supported in `|xi| < 1/2` with
//! `int m^2 = 1`, the kernel has Fourier transform
//!
//! ```text
//! K^(xi) = (1 + |xi|^2)^{-(d+1)/2} (m * m)(xi),      supp K^ = {|xi| <= 1}
//! ```
//!
//! `K` itself is positive with mean one. Everything here is tabulated radially:
//! `K^` on [0, 1], `K` on [0, x_max] and the tail mass `I(t) = int_{|x|>=t} K`
//! on [0, t_max], together with `gamma = (e^{-2 pi} int_{|y|<=1} K)^{-1}` and the
//! decay profile `psi(t) = 4 gamma I(t/2)`.

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::interp::UniformTable;
use crate::quadrature::{refine_until, CompositeRule, GaussLegendre};

/// Format version of the serialized kernel document.
pub const KERNEL_FORMAT_VERSION: u32 = 1;

/// `e^{-2 pi}`, the tail-ratio constant.
pub fn tail_ratio_floor() -> f64 {
    (-2.0 * PI).exp()
}

/// Surface measure of the unit sphere in R^d.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!("dimension checked at construction"),
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d, "1, 2, 3"))
    }
}

/// Build parameters. Every tolerance used during construction lives here so
/// that a serialized table records how it was made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub dimension: usize,
    /// Radial sampling step of the bump profile.
    pub bump_grid_step: f64,
    pub x_max: f64,
    pub t_max: f64,
    /// Step of the K and I tables.
    pub table_step: f64,
    /// Step of the tabulated K^ on [0, 1].
    pub khat_step: f64,
    /// Composite Gauss–Legendre panels (and order) for the radial inverse transform.
    pub rho_panels: usize,
    pub rho_order: usize,
    /// Panels and angular nodes for the autocorrelation quadrature.
    pub conv_panels: usize,
    pub conv_order: usize,
    pub conv_angular: usize,
    /// Per-panel tolerance and refinement target of adaptive steps.
    pub panel_tolerance: f64,
    pub refine_tolerance: f64,
    /// Allowed negative excursion of tabulated K.
    pub quadrature_tolerance: f64,
    /// Slack of the tail-ratio inequality.
    pub tail_slack: f64,
}

impl KernelConfig {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            bump_grid_step: 1.0 / 256.0,
            x_max: 20.0,
            t_max: 40.0,
            table_step: 1.0 / 64.0,
            khat_step: 1.0 / 1024.0,
            rho_panels: 64,
            rho_order: 12,
            conv_panels: 16,
            conv_order: 12,
            conv_angular: 160,
            panel_tolerance: 1e-8,
            refine_tolerance: 1e-6,
            quadrature_tolerance: 1e-6,
            tail_slack: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_dimension(self.dimension)?;
        if !(self.bump_grid_step > 0.0 && self.bump_grid_step <= 1.0 / 64.0) {
            return Err(invalid("bump_grid_step", "must lie in (0, 1/64]"));
        }
        if self.x_max < 20.0 {
            return Err(invalid("x_max", "must be at least 20"));
        }
        if self.t_max < self.x_max {
            return Err(invalid("t_max", "must be at least x_max"));
        }
        if !(self.table_step > 0.0 && self.table_step <= 0.25) {
            return Err(invalid("table_step", "must lie in (0, 1/4]"));
        }
        let per_unit = 1.0 / self.table_step;
        if (per_unit - per_unit.round()).abs() > 1e-9 {
            return Err(invalid("table_step", "must divide 1 exactly"));
        }
        if !(self.khat_step > 0.0 && self.khat_step <= 1.0 / 64.0) {
            return Err(invalid("khat_step", "must lie in (0, 1/64]"));
        }
        Ok(())
    }

    /// Stable hash of the configuration, used for cache naming and provenance.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }
}

/// The normalized bump `m(xi) = c_d exp(-1/(1/4 - |xi|^2))` on `|xi| < 1/2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BumpProfile {
    pub dimension: usize,
    pub support_radius: f64,
    pub grid_step: f64,
    /// Normalizing constant `c_d`.
    pub normalization: f64,
    /// Samples on `0, grid_step, ..., 1/2`.
    pub samples: Vec<f64>,
}

fn raw_bump(r: f64) -> f64 {
    let gap = 0.25 - r * r;
    if gap <= 0.0 {
        0.0
    } else {
        (-1.0 / gap).exp()
    }
}

/// Builds the normalized bump for dimension `d`.
pub fn build_bump(d: usize, grid_step: f64) -> Result<BumpProfile> {
    build_bump_with(d, grid_step, 1e-6)
}

pub(crate) fn build_bump_with(d: usize, grid_step: f64, tolerance: f64) -> Result<BumpProfile> {
    check_dimension(d)?;
    if !(grid_step > 0.0 && grid_step <= 1.0 / 64.0) {
        return Err(invalid("grid_step", "must lie in (0, 1/64]"));
    }
    let (square_integral, change) = refine_until(0.0, 0.5, 12, 4, 1 << 12, 1e-13, |s| {
        let v = raw_bump(s);
        v * v * s.powi(d as i32 - 1)
    });
    if change > tolerance {
        return Err(Error::QuadratureNonConvergent {
            what: "bump normalization",
            change,
            tolerance,
        });
    }
    let normalization = 1.0 / (sphere_area(d) * square_integral).sqrt();
    let count = (0.5 / grid_step).round() as usize;
    let samples = (0..=count)
        .map(|i| normalization * raw_bump(i as f64 * grid_step))
        .collect();
    Ok(BumpProfile {
        dimension: d,
        support_radius: 0.5,
        grid_step,
        normalization,
        samples,
    })
}

impl BumpProfile {
    pub fn value(&self, r: f64) -> f64 {
        self.normalization * raw_bump(r.abs())
    }

    /// `int_{R^d} m^2` by radial quadrature.
    pub fn square_integral(&self) -> f64 {
        let d = self.dimension;
        let rule = CompositeRule::new(0.0, 0.5, 32, 12);
        sphere_area(d)
            * rule.integrate(|s| {
                let v = self.value(s);
                v * v * s.powi(d as i32 - 1)
            })
    }
}

/// Quadrature for `(m * m)(rho)` exploiting radial symmetry.
#[derive(Debug, Clone)]
pub struct Autocorrelation {
    bump: BumpProfile,
    radial: GaussLegendre,
    panels: usize,
    angular: usize,
}

impl Autocorrelation {
    pub fn new(bump: &BumpProfile, panels: usize, order: usize, angular: usize) -> Self {
        Self {
            bump: bump.clone(),
            radial: GaussLegendre::new(order),
            panels,
            angular,
        }
    }

    pub fn value(&self, rho: f64) -> f64 {
        let rho = rho.abs();
        if rho >= 1.0 {
            return 0.0;
        }
        let d = self.bump.dimension;
        let m = |r: f64| self.bump.value(r);
        if rho < 1e-12 {
            return self.bump.square_integral();
        }
        let lo = (rho - 0.5).max(0.0);
        let h = (0.5 - lo) / self.panels as f64;
        let mut total = 0.0;
        for p in 0..self.panels {
            let a = lo + h * p as f64;
            total += self.radial.integrate(a, a + h, |s| {
                let ms = m(s);
                if ms == 0.0 {
                    return 0.0;
                }
                match d {
                    // eta = s and eta = -s folded together
                    1 => m(rho - s) * ms + if s > 0.0 { m(rho + s) * ms } else { 0.0 },
                    2 => 2.0 * s * ms * self.angular_2d(rho, s),
                    _ => 2.0 * PI * s * s * ms * self.polar_3d(rho, s),
                }
            });
        }
        total
    }

    /// `int_0^pi m(|xi - s e^{i phi}|) d phi` with `|xi| = rho`.
    fn angular_2d(&self, rho: f64, s: f64) -> f64 {
        let cmax = (rho * rho + s * s - 0.25) / (2.0 * rho * s);
        if cmax >= 1.0 {
            return 0.0;
        }
        let phi_max = if cmax <= -1.0 { PI } else { cmax.acos() };
        // The integrand is even about 0 and either periodic (phi_max = pi) or
        // flat to all orders at phi_max, so the trapezoid rule is spectral.
        let n = self.angular;
        let h = phi_max / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let phi = h * i as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            let dist2 = rho * rho + s * s - 2.0 * rho * s * phi.cos();
            acc += w * self.bump.value(dist2.max(0.0).sqrt());
        }
        acc * h
    }

    /// `int_{-1}^{1} m(sqrt(rho^2 + s^2 - 2 rho s u)) du`.
    fn polar_3d(&self, rho: f64, s: f64) -> f64 {
        let umin = (rho * rho + s * s - 0.25) / (2.0 * rho * s);
        if umin >= 1.0 {
            return 0.0;
        }
        let a = umin.max(-1.0);
        let panels = 8;
        let h = (1.0 - a) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let lo = a + h * p as f64;
            acc += self.radial.integrate(lo, lo + h, |u| {
                let dist2 = rho * rho + s * s - 2.0 * rho * s * u;
                self.bump.value(dist2.max(0.0).sqrt())
            });
        }
        acc
    }
}

/// `(m * m)` tabulated on [0, 1] with the bump's grid step.
pub fn autocorrelate(bump: &BumpProfile) -> Result<UniformTable> {
    let auto = Autocorrelation::new(bump, 16, 12, 160);
    let count = (1.0 / bump.grid_step).round() as usize;
    let values: Vec<f64> = (0..=count)
        .into_par_iter()
        .map(|i| auto.value(i as f64 * bump.grid_step))
        .collect();
    let at_zero = values[0];
    if (at_zero - 1.0).abs() > 1e-6 {
        return Err(Error::QuadratureNonConvergent {
            what: "autocorrelation at the origin",
            change: (at_zero - 1.0).abs(),
            tolerance: 1e-6,
        });
    }
    Ok(UniformTable::new(0.0, bump.grid_step, values))
}

fn bessel_weight(d: usize) -> f64 {
    (d as f64 + 1.0) / 2.0
}

/// Diagnostics recorded while building a table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelDiagnostics {
    /// Smallest K value seen on the table and on all quadrature nodes.
    pub min_k: f64,
    /// `int K` (= I(0)).
    pub mean: f64,
    /// `min_t I(t+1) / I(t)` over the table.
    pub min_tail_ratio: f64,
    /// `int_{|y|<=1} K`.
    pub unit_ball_mass: f64,
}

/// Tabulated kernel: `K^`, `K`, `I` and `gamma`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelTable {
    pub format_version: u32,
    pub config: KernelConfig,
    pub bump_normalization: f64,
    pub khat: UniformTable,
    pub kvals: UniformTable,
    pub tail: UniformTable,
    pub gamma: f64,
    /// Constant of the fitted envelope `|K(x)| <= C |x|^{-(d+2)}` beyond x_max.
    pub tail_envelope: f64,
    pub diagnostics: KernelDiagnostics,
}

/// Radial inverse Fourier transform of a compactly supported radial `K^`.
struct RadialInverse {
    d: usize,
    nodes: Vec<f64>,
    weighted: Vec<f64>,
}

impl RadialInverse {
    fn new(d: usize, rule: &CompositeRule, khat: impl Fn(f64) -> f64 + Sync) -> Self {
        let weighted = rule
            .nodes
            .par_iter()
            .zip(&rule.weights)
            .map(|(&rho, &w)| {
                let jac = match d {
                    1 => 2.0,
                    2 => 2.0 * PI * rho,
                    _ => 2.0 * rho,
                };
                w * jac * khat(rho)
            })
            .collect();
        Self {
            d,
            nodes: rule.nodes.clone(),
            weighted,
        }
    }

    fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        let mut acc = 0.0;
        match self.d {
            1 => {
                for (rho, w) in self.nodes.iter().zip(&self.weighted) {
                    acc += w * (2.0 * PI * r * rho).cos();
                }
            }
            2 => {
                for (rho, w) in self.nodes.iter().zip(&self.weighted) {
                    acc += w * libm::j0(2.0 * PI * r * rho);
                }
            }
            _ => {
                if r < 1e-9 {
                    for (rho, w) in self.nodes.iter().zip(&self.weighted) {
                        // (2/r) sin(2 pi r rho) -> 4 pi rho
                        acc += w * 2.0 * PI * rho;
                    }
                } else {
                    for (rho, w) in self.nodes.iter().zip(&self.weighted) {
                        acc += w * (2.0 * PI * r * rho).sin() / r;
                    }
                }
            }
        }
        acc
    }
}

impl KernelTable {
    /// Build from scratch. Fails if K dips below `-quadrature_tolerance` or the
    /// tail-ratio inequality is violated beyond `tail_slack`.
    pub fn build(config: &KernelConfig) -> Result<Self> {
        config.validate()?;
        let d = config.dimension;
        let bump = build_bump_with(d, config.bump_grid_step, config.refine_tolerance)?;
        let auto = Autocorrelation::new(
            &bump,
            config.conv_panels,
            config.conv_order,
            config.conv_angular,
        );
        let weight = bessel_weight(d);
        let khat_exact = |rho: f64| (1.0 + rho * rho).powf(-weight) * auto.value(rho);

        let khat_count = (1.0 / config.khat_step).round() as usize;
        let khat_values: Vec<f64> = (0..=khat_count)
            .into_par_iter()
            .map(|i| khat_exact(i as f64 * config.khat_step))
            .collect();
        let khat = UniformTable::new(0.0, config.khat_step, khat_values);

        let rule = CompositeRule::new(0.0, 1.0, config.rho_panels, config.rho_order);
        let inverse = RadialInverse::new(d, &rule, khat_exact);

        let step = config.table_step;
        let n_x = (config.x_max / step).round() as usize;
        let kvals: Vec<f64> = (0..=n_x)
            .into_par_iter()
            .map(|i| inverse.eval(i as f64 * step))
            .collect();

        // Exact per-interval radial integrals of K r^{d-1}.
        let gl = GaussLegendre::new(8);
        let pieces: Vec<(f64, f64)> = (0..n_x)
            .into_par_iter()
            .map(|i| {
                let a = i as f64 * step;
                let mut min_k = f64::INFINITY;
                let mut acc = 0.0;
                for (r, w) in gl.mapped(a, a + step) {
                    let k = inverse.eval(r);
                    min_k = min_k.min(k);
                    acc += w * k * r.powi(d as i32 - 1);
                }
                (acc * sphere_area(d), min_k)
            })
            .collect();
        let min_k = pieces
            .iter()
            .map(|p| p.1)
            .chain(kvals.iter().copied())
            .fold(f64::INFINITY, f64::min);
        if min_k < -config.quadrature_tolerance {
            return Err(Error::KernelCheck {
                check: "positivity",
                observed: min_k,
                allowed: -config.quadrature_tolerance,
            });
        }

        // Envelope beyond x_max, fitted on the last half of the table.
        let half = n_x / 2;
        let tail_envelope = (half..=n_x)
            .map(|i| {
                let x = i as f64 * step;
                kvals[i].abs() * x.powi(d as i32 + 2)
            })
            .fold(0.0, f64::max);
        let remainder = |t: f64| sphere_area(d) * tail_envelope / (2.0 * t * t);

        let n_t = (config.t_max / step).round() as usize;
        let mut tail = vec![0.0; n_t + 1];
        let mut acc = remainder(config.x_max);
        tail[n_x] = acc;
        for i in (0..n_x).rev() {
            acc += pieces[i].0;
            tail[i] = acc;
        }
        for (i, slot) in tail.iter_mut().enumerate().skip(n_x + 1) {
            *slot = remainder(i as f64 * step);
        }

        let per_unit = (1.0 / step).round() as usize;
        let floor = tail_ratio_floor();
        let mut min_tail_ratio = f64::INFINITY;
        for i in 0..tail.len().saturating_sub(per_unit) {
            let (now, later) = (tail[i], tail[i + per_unit]);
            min_tail_ratio = min_tail_ratio.min(later / now);
            if later < floor * now - config.tail_slack {
                return Err(Error::KernelCheck {
                    check: "tail ratio I(t+1) >= exp(-2pi) I(t)",
                    observed: later / now,
                    allowed: floor,
                });
            }
        }

        let mean = tail[0];
        let unit_ball_mass = tail[0] - tail[per_unit];
        let gamma = 1.0 / (floor * unit_ball_mass);

        Ok(Self {
            format_version: KERNEL_FORMAT_VERSION,
            config: config.clone(),
            bump_normalization: bump.normalization,
            khat,
            kvals: UniformTable::new(0.0, step, kvals),
            tail: UniformTable::new(0.0, step, tail),
            gamma,
            tail_envelope,
            diagnostics: KernelDiagnostics {
                min_k,
                mean,
                min_tail_ratio,
                unit_ball_mass,
            },
        })
    }

    pub fn dimension(&self) -> usize {
        self.config.dimension
    }

    /// `K^(rho)`, zero for `rho >= 1`.
    pub fn khat(&self, rho: f64) -> f64 {
        let rho = rho.abs();
        if rho >= 1.0 {
            0.0
        } else {
            self.khat.eval(rho)
        }
    }

    /// `K(r)` on the table; beyond `x_max` the envelope bound.
    pub fn k(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= self.config.x_max {
            self.kvals.eval(r)
        } else {
            self.tail_envelope * r.powi(-(self.dimension() as i32) - 2)
        }
    }

    /// Tail mass `I(t)`; beyond `t_max` the (over-estimating) envelope bound.
    pub fn tail_mass(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        if t <= self.config.t_max {
            self.tail.eval(t)
        } else {
            sphere_area(self.dimension()) * self.tail_envelope / (2.0 * t * t)
        }
    }

    /// `psi(t) = 4 gamma I(t/2)`.
    pub fn psi(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(invalid("t", "psi is defined for t >= 0"));
        }
        Ok(4.0 * self.gamma * self.tail_mass(t / 2.0))
    }

    /// `H(s) = gamma I(s) = psi(2 s) / 4`, the profile of `H_R` at `s = R dist`.
    pub fn h_profile(&self, s: f64) -> f64 {
        self.gamma * self.tail_mass(s)
    }

    /// Identity `psi(2t)/4 = gamma I(t)` on the tail grid; returns the largest
    /// relative mismatch.
    pub fn check_h_identity(&self) -> f64 {
        self.tail
            .grid()
            .map(|t| {
                let lhs = self.psi(2.0 * t).expect("t >= 0") / 4.0;
                let rhs = self.gamma * self.tail_mass(t);
                (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }

    pub fn decay_profile(&self) -> DecayProfile<'_> {
        DecayProfile::new(self)
    }

    /// Short provenance string: dimension plus config fingerprint.
    pub fn provenance(&self) -> String {
        format!("d{}-{}", self.dimension(), self.config.fingerprint())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: KernelTable = serde_json::from_str(text)?;
        if table.format_version != KERNEL_FORMAT_VERSION {
            return Err(Error::Cache(format!(
                "format version {} (expected {KERNEL_FORMAT_VERSION})",
                table.format_version
            )));
        }
        Ok(Self {
            khat: table.khat.rebuild(),
            kvals: table.kvals.rebuild(),
            tail: table.tail.rebuild(),
            ..table
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Load `path` if it holds a table built from `config`, otherwise build and
    /// write it.
    pub fn load_or_build(config: &KernelConfig, path: &Path) -> Result<Self> {
        if path.exists() {
            let table = Self::load(path)?;
            if &table.config == config {
                return Ok(table);
            }
        }
        let table = Self::build(config)?;
        table.save(path)?;
        Ok(table)
    }
}

/// Table for the bump's dimension and grid step with the given `x_max`,
/// `t_max` and otherwise default settings.
pub fn build_kernel_table(bump: &BumpProfile, x_max: f64, t_max: f64) -> Result<KernelTable> {
    let config = KernelConfig {
        bump_grid_step: bump.grid_step,
        x_max,
        t_max,
        ..KernelConfig::new(bump.dimension)
    };
    KernelTable::build(&config)
}

/// `psi(t) = 4 gamma I(t/2)` tabulated on the doubled tail grid.
#[derive(Debug, Clone)]
pub struct DecayProfile<'a> {
    pub kernel: &'a KernelTable,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl<'a> DecayProfile<'a> {
    pub fn new(kernel: &'a KernelTable) -> Self {
        let grid: Vec<f64> = kernel.tail.grid().map(|t| 2.0 * t).collect();
        let values = grid
            .iter()
            .map(|&t| kernel.psi(t).expect("grid is nonnegative"))
            .collect();
        Self {
            kernel,
            grid,
            values,
        }
    }

    /// `c(alpha) = sup_t psi(t) (1 + t)^alpha` over the table.
    pub fn decay_constant(&self, alpha: f64) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(t, v)| v * (1.0 + t).powf(alpha))
            .fold(0.0, f64::max)
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }
}
