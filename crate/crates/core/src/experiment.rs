//! Serializable experiment configurations and their runner. Every run yields
//! a JSON report (with config hash and kernel provenance), optional CSV data
//! and a list of named checks.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::erdos_turan::{self, DiscrepancyReport, RRule};
use crate::error::{invalid, Result};
use crate::glp::{self, PhiTable, Strategy};
use crate::kernel::{tail_ratio_floor, KernelConfig, KernelTable};
use crate::majorant::{convolution_claim_excess, majorant_pair_with, sandwich_report};
use crate::pointsets::{self, schmidt_sum, PointSet, PointSpec};
use crate::sphere::{self, Cap};
use crate::stats::{log_log_slope, max_relative_deviation, spread};
use crate::torus::spectrum::default_resolution;
use crate::torus::{ChainSystem, HSpectrum, Polytope, SetSpec, TorusSet};

/// Kernel quadrature tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceProfile {
    pub panel: f64,
    pub refine: f64,
    pub quadrature: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        let c = KernelConfig::new(2);
        Self {
            panel: c.panel_tolerance,
            refine: c.refine_tolerance,
            quadrature: c.quadrature_tolerance,
        }
    }
}

/// How R is chosen for a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum RChoice {
    Value { r: f64 },
    /// Formula R for `rule` with exponents `alpha`, `beta`.
    Auto { rule: RRule, alpha: f64, beta: f64 },
    /// Smallest bound over `grid` and the formula R.
    Search {
        rule: RRule,
        alpha: f64,
        beta: f64,
        grid: Vec<f64>,
    },
}

/// Hyperplane family X.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Family {
    Coordinate { d: usize },
    Polytope { vertices: Vec<Vec<f64>> },
}

impl Family {
    pub fn chains(&self) -> Result<ChainSystem> {
        match self {
            Family::Coordinate { d } => ChainSystem::coordinate(*d),
            Family::Polytope { vertices } => ChainSystem::from_polytope(&Polytope::from_vertices(vertices.clone(), 1e-9)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    KernelBuild {
        d: usize,
    },
    Sandwich {
        set: SetSpec,
        r: f64,
        grid_n: usize,
        #[serde(default = "default_claim_points")]
        claim_points: usize,
        /// Grid for Ĥ_R; defaults to `max(default_resolution(R), 1024)`.
        #[serde(default)]
        h_resolution: Option<usize>,
    },
    Bound {
        set: SetSpec,
        points: PointSpec,
        r: RChoice,
    },
    LatticeScaling {
        set: SetSpec,
        ms: Vec<usize>,
        alpha: f64,
        beta: f64,
        target_slope: f64,
        slope_tolerance: f64,
    },
    KroneckerScaling {
        set: SetSpec,
        x: Vec<f64>,
        ms: Vec<usize>,
        alpha: f64,
        beta: f64,
        epsilon: f64,
        schmidt_rs: Vec<f64>,
        schmidt_factor: f64,
        max_slope: f64,
    },
    GlpSearch {
        family: Family,
        ms: Vec<u64>,
        strategy: Strategy,
        /// Allowed `max |c / mean(c) - 1|` for the fitted constants.
        constant_tolerance: f64,
    },
    PolytopeFamily {
        family: Family,
        ms: Vec<u64>,
        strategy: Strategy,
        /// Random boxes used to calibrate the bound's constant.
        calibration_sets: usize,
        constant_tolerance: f64,
    },
    SphereOrbit {
        k: usize,
        base: [f64; 3],
        cap: Cap,
        max_degree: usize,
        delta: f64,
    },
}

fn default_claim_points() -> usize {
    100
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::KernelBuild { .. } => "kernel-build",
            Experiment::Sandwich { .. } => "sandwich",
            Experiment::Bound { .. } => "bound",
            Experiment::LatticeScaling { .. } => "lattice-scaling",
            Experiment::KroneckerScaling { .. } => "kronecker-scaling",
            Experiment::GlpSearch { .. } => "glp-search",
            Experiment::PolytopeFamily { .. } => "polytope-family",
            Experiment::SphereOrbit { .. } => "sphere-orbit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Directory (or `.json` file) holding kernel tables.
    #[serde(default)]
    pub kernel_cache: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerance: ToleranceProfile,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            kernel_cache: None,
            seed: 0,
            tolerance: ToleranceProfile::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// SHA-256 of the canonical JSON form. The cache path is excluded so
    /// moving the cache does not change the hash.
    pub fn hash(&self) -> String {
        let canonical = ExperimentConfig {
            kernel_cache: None,
            ..self.clone()
        };
        let text = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn kernel_config(&self, d: usize) -> KernelConfig {
        KernelConfig {
            panel_tolerance: self.tolerance.panel,
            refine_tolerance: self.tolerance.refine,
            quadrature_tolerance: self.tolerance.quadrature,
            ..KernelConfig::new(d)
        }
    }

    /// Kernel table for dimension `d`, through the cache when one is set.
    pub fn kernel(&self, d: usize) -> Result<KernelTable> {
        let config = self.kernel_config(d);
        match &self.kernel_cache {
            None => KernelTable::build(&config),
            Some(path) => KernelTable::load_or_build(&config, &cache_file(path, &config)),
        }
    }
}

/// Table file inside a cache directory; a path ending in `.json` is used as is.
pub fn cache_file(path: &Path, config: &KernelConfig) -> PathBuf {
    if path.extension().is_some_and(|e| e == "json") {
        path.to_path_buf()
    } else {
        path.join(format!("kernel-d{}-{}.json", config.dimension, config.fingerprint()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub allowed: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, observed: f64, allowed: f64) -> Self {
        Self {
            name: name.to_string(),
            observed,
            allowed,
            passed: observed <= allowed,
        }
    }

    pub fn at_least(name: &str, observed: f64, allowed: f64) -> Self {
        Self {
            name: name.to_string(),
            observed,
            allowed,
            passed: observed >= allowed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: &'static str,
    pub report: Value,
    pub csv: Option<String>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn report_json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("report serializes")
    }

    /// Writes the JSON report and, when present, the CSV next to it.
    pub fn write(&self, json_path: &Path, csv_path: Option<&Path>) -> Result<()> {
        if let Some(parent) = json_path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(json_path, self.report_json())?;
        if let (Some(csv), Some(path)) = (&self.csv, csv_path) {
            std::fs::write(path, csv)?;
        }
        Ok(())
    }
}

pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    let (result, csv, checks, kernel) = match &config.experiment {
        Experiment::KernelBuild { d } => kernel_build(config, *d)?,
        Experiment::Sandwich {
            set,
            r,
            grid_n,
            claim_points,
            h_resolution,
        } => sandwich(config, set, *r, *grid_n, *claim_points, *h_resolution)?,
        Experiment::Bound { set, points, r } => bound(config, set, points, r)?,
        Experiment::LatticeScaling {
            set,
            ms,
            alpha,
            beta,
            target_slope,
            slope_tolerance,
        } => lattice_scaling(config, set, ms, *alpha, *beta, *target_slope, *slope_tolerance)?,
        Experiment::KroneckerScaling {
            set,
            x,
            ms,
            alpha,
            beta,
            epsilon,
            schmidt_rs,
            schmidt_factor,
            max_slope,
        } => kronecker_scaling(
            config,
            set,
            x,
            ms,
            (*alpha, *beta, *epsilon),
            schmidt_rs,
            *schmidt_factor,
            *max_slope,
        )?,
        Experiment::GlpSearch {
            family,
            ms,
            strategy,
            constant_tolerance,
        } => glp_search(family, ms, strategy, *constant_tolerance)?,
        Experiment::PolytopeFamily {
            family,
            ms,
            strategy,
            calibration_sets,
            constant_tolerance,
        } => polytope_family(config, family, ms, strategy, *calibration_sets, *constant_tolerance)?,
        Experiment::SphereOrbit {
            k,
            base,
            cap,
            max_degree,
            delta,
        } => sphere_orbit(*k, *base, cap, *max_degree, *delta)?,
    };
    let report = json!({
        "kind": config.experiment.kind(),
        "config_hash": config.hash(),
        "config": config.experiment,
        "seed": config.seed,
        "kernel": kernel,
        "result": result,
        "checks": checks,
    });
    Ok(Outcome {
        kind: config.experiment.kind(),
        report,
        csv,
        checks,
    })
}

type Parts = (Value, Option<String>, Vec<Check>, Value);

fn provenance(kernel: &KernelTable) -> Value {
    json!({
        "provenance": kernel.provenance(),
        "format_version": kernel.format_version,
        "gamma": kernel.gamma,
        "config": kernel.config,
    })
}

fn kernel_build(config: &ExperimentConfig, d: usize) -> Result<Parts> {
    let kernel = config.kernel(d)?;
    let floor = tail_ratio_floor();
    // I(t+1) >= e^{-2 pi} I(t) on [0, 10]
    let step = kernel.config.table_step;
    let steps = (10.0 / step).round() as usize;
    let mut worst_gap = f64::NEG_INFINITY;
    for i in 0..=steps {
        let t = i as f64 * step;
        let gap = floor * kernel.tail_mass(t) - kernel.tail_mass(t + 1.0);
        worst_gap = worst_gap.max(gap);
    }
    let profile = kernel.decay_profile();
    let result = json!({
        "dimension": d,
        "gamma": kernel.gamma,
        "psi_0": kernel.psi(0.0)?,
        "decay_constant_4": profile.decay_constant(4.0),
        "psi_nonincreasing": profile.is_nonincreasing(),
        "h_identity_mismatch": kernel.check_h_identity(),
        "tail_envelope": kernel.tail_envelope,
        "diagnostics": kernel.diagnostics,
        "tail_ratio_worst_gap": worst_gap,
    });
    let checks = vec![
        Check::at_least("min K", kernel.diagnostics.min_k, -1e-6),
        Check::at_most("|int K - 1|", (kernel.diagnostics.mean - 1.0).abs(), 1e-5),
        Check::at_most("e^{-2pi} I(t) - I(t+1) on [0,10]", worst_gap, 1e-9),
    ];
    let mut csv = String::from("t,K,I,psi\n");
    for t in kernel.tail.grid() {
        csv.push_str(&format!("{t},{},{},{}\n", kernel.k(t), kernel.tail_mass(t), kernel.psi(t)?));
    }
    Ok((result, Some(csv), checks, provenance(&kernel)))
}

/// Floor on the Ĥ_R grid for sandwich runs.
pub const SANDWICH_H_RESOLUTION: usize = 1024;

fn sandwich(
    config: &ExperimentConfig,
    spec: &SetSpec,
    r: f64,
    grid_n: usize,
    claim_points: usize,
    h_resolution: Option<usize>,
) -> Result<Parts> {
    let set = TorusSet::from_spec(spec)?;
    let d = set.dimension();
    let kernel = config.kernel(d)?;
    if r < 4.0 {
        return Err(invalid("R", "must be at least 4"));
    }
    let n = h_resolution.unwrap_or_else(|| default_resolution(r).max(SANDWICH_H_RESOLUTION));
    let h = HSpectrum::with_resolution(&set, &kernel, r, n)?;
    let pair = majorant_pair_with(&set, &kernel, &h)?;
    let (report, rows) = sandwich_report(&pair, &set, &kernel, grid_n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let xs: Vec<Vec<f64>> = (0..claim_points)
        .map(|_| (0..d).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let claim = if xs.is_empty() {
        f64::NEG_INFINITY
    } else {
        convolution_claim_excess(&set, &kernel, r, &xs)
    };
    let checks = vec![
        Check::at_most("A <= chi", report.lower.max, report.budget),
        Check::at_most("chi <= B", report.upper.max, report.budget),
        Check::at_most("B - A <= psi(R dist)", report.width.max, 2.0 * report.budget),
        Check::at_most("A^(0) - mu", report.mean_a - report.measure, report.budget),
        Check::at_most("mu - B^(0)", report.measure - report.mean_b, report.budget),
        Check::at_most("|chi - K_R * chi| - I(R dist)", claim, report.budget),
    ];
    let result = json!({
        "set": spec,
        "sandwich": report,
        "h_resolution": n,
        "h0": pair.h0,
        "h_error": pair.h_error,
        "coefficients": pair.a.coefficients.len(),
        "hermitian_defect": pair.a.hermitian_defect().max(pair.b.hermitian_defect()),
        "claim_excess": claim,
    });
    let header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    let mut csv = format!("{},chi,A,B,psi_bound\n", header.join(","));
    for row in &rows {
        for x in &row.x {
            csv.push_str(&format!("{x},"));
        }
        csv.push_str(&format!("{},{},{},{}\n", row.chi, row.a, row.b, row.psi_bound));
    }
    Ok((result, Some(csv), checks, provenance(&kernel)))
}

fn rule_r(rule: RRule, points: &PointSet, alpha: f64, beta: f64) -> Result<f64> {
    erdos_turan::optimal_r(rule, points.len(), points.dimension, alpha, beta)
}

fn report_csv(reports: &[DiscrepancyReport]) -> String {
    let mut csv = String::from("m,R,bound,uncertainty,h0_term,weyl_term,true_discrepancy\n");
    for r in reports {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.point_count,
            r.r,
            r.bound,
            r.uncertainty,
            r.breakdown.h0_term,
            r.breakdown.weyl_term,
            r.true_discrepancy.unwrap_or(f64::NAN)
        ));
    }
    csv
}

fn validity(reports: &[DiscrepancyReport]) -> Check {
    let worst = reports
        .iter()
        .map(|r| r.true_discrepancy.unwrap_or(0.0) - r.bound - r.uncertainty)
        .fold(f64::NEG_INFINITY, f64::max);
    Check::at_most("true discrepancy - bound - uncertainty", worst, 0.0)
}

fn bound(config: &ExperimentConfig, spec: &SetSpec, points: &PointSpec, choice: &RChoice) -> Result<Parts> {
    let set = TorusSet::from_spec(spec)?;
    let pts = PointSet::from_spec(points)?;
    let kernel = config.kernel(set.dimension())?;
    let (best, mut reports) = match choice {
        RChoice::Value { r } => (0, vec![erdos_turan::et_bound(&set, &pts, &kernel, *r)?]),
        RChoice::Auto { rule, alpha, beta } => {
            let r = rule_r(*rule, &pts, *alpha, *beta)?;
            (0, vec![erdos_turan::et_bound(&set, &pts, &kernel, r)?])
        }
        RChoice::Search {
            rule,
            alpha,
            beta,
            grid,
        } => {
            let r = rule_r(*rule, &pts, *alpha, *beta)?;
            erdos_turan::grid_search_r(&set, &pts, &kernel, grid, Some(r))?
        }
    };
    if let RChoice::Auto { alpha, beta, .. } | RChoice::Search { alpha, beta, .. } = choice {
        for r in &mut reports {
            r.exponents = Some(erdos_turan::Exponents {
                alpha: *alpha,
                beta: *beta,
                delta: None,
            });
        }
    }
    let checks = vec![validity(&reports)];
    let result = json!({
        "best": best,
        "report": reports[best],
        "all": reports,
    });
    Ok((result, Some(report_csv(&reports)), checks, provenance(&kernel)))
}

fn lattice_scaling(
    config: &ExperimentConfig,
    spec: &SetSpec,
    ms: &[usize],
    alpha: f64,
    beta: f64,
    target: f64,
    tol: f64,
) -> Result<Parts> {
    if ms.len() < 2 {
        return Err(invalid("ms", "needs at least two sizes"));
    }
    let set = TorusSet::from_spec(spec)?;
    let d = set.dimension();
    let kernel = config.kernel(d)?;
    let mut reports = Vec::new();
    for &m in ms {
        let pts = pointsets::lattice(d, m)?;
        let r = erdos_turan::optimal_r(RRule::Lattice, m, d, alpha, beta)?;
        let mut rep = erdos_turan::et_bound(&set, &pts, &kernel, r)?;
        rep.exponents = Some(erdos_turan::Exponents { alpha, beta, delta: None });
        reports.push(rep);
    }
    let x: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let y: Vec<f64> = reports.iter().map(|r| r.bound).collect();
    let slope = log_log_slope(&x, &y);
    let checks = vec![
        Check::at_most("|slope - target|", (slope - target).abs(), tol),
        validity(&reports),
    ];
    let result = json!({ "slope": slope, "target_slope": target, "reports": reports });
    Ok((result, Some(report_csv(&reports)), checks, provenance(&kernel)))
}

#[allow(clippy::too_many_arguments)]
fn kronecker_scaling(
    config: &ExperimentConfig,
    spec: &SetSpec,
    x: &[f64],
    ms: &[usize],
    (alpha, beta, epsilon): (f64, f64, f64),
    schmidt_rs: &[f64],
    schmidt_factor: f64,
    max_slope: f64,
) -> Result<Parts> {
    if ms.len() < 2 {
        return Err(invalid("ms", "needs at least two sizes"));
    }
    let set = TorusSet::from_spec(spec)?;
    let d = set.dimension();
    if x.len() != d {
        return Err(invalid("x", "dimension differs from the set"));
    }
    let kernel = config.kernel(d)?;
    let mut schmidt = Vec::new();
    for &r in schmidt_rs {
        let s = schmidt_sum(x, r)?;
        schmidt.push(json!({ "R": r, "sum": s, "normalized": s / (1.0 + r).ln().powi(d as i32 + 1) }));
    }
    let normalized: Vec<f64> = schmidt.iter().map(|v| v["normalized"].as_f64().unwrap_or(f64::NAN)).collect();
    let mut reports = Vec::new();
    for &m in ms {
        let pts = pointsets::kronecker(x, m)?;
        let r = erdos_turan::optimal_r(RRule::Kronecker { epsilon }, m, d, alpha, beta)?;
        let mut rep = erdos_turan::et_bound(&set, &pts, &kernel, r)?;
        rep.exponents = Some(erdos_turan::Exponents { alpha, beta, delta: None });
        reports.push(rep);
    }
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let ys: Vec<f64> = reports.iter().map(|r| r.bound).collect();
    let slope = log_log_slope(&xs, &ys);
    let mut checks = Vec::new();
    if !normalized.is_empty() {
        checks.push(Check::at_most("schmidt spread", spread(&normalized), schmidt_factor));
    }
    checks.push(Check::at_most("bound slope", slope, max_slope));
    checks.push(validity(&reports));
    let result = json!({ "schmidt": schmidt, "slope": slope, "reports": reports });
    Ok((result, Some(report_csv(&reports)), checks, provenance(&kernel)))
}

fn glp_search(family: &Family, ms: &[u64], strategy: &Strategy, tol: f64) -> Result<Parts> {
    if ms.is_empty() {
        return Err(invalid("ms", "needs at least one modulus"));
    }
    let chains = family.chains()?;
    let mut certs = Vec::new();
    for &m in ms {
        certs.push(glp::search(m, &chains, strategy)?);
    }
    let mut checks = Vec::new();
    if matches!(strategy, Strategy::Exhaustive) {
        let worst = certs.iter().map(|c| c.value - c.average).fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::at_most("value - average", worst, 0.0));
    }
    let constants: Vec<f64> = certs.iter().map(|c| c.average_constant).collect();
    let deviation = max_relative_deviation(&constants);
    if ms.len() > 1 {
        checks.push(Check::at_most("average constant deviation", deviation, tol));
    }
    let mut csv = String::from("m,g,value,average,ratio,average_constant,value_constant\n");
    for c in &certs {
        let g: Vec<String> = c.g.iter().map(|v| v.to_string()).collect();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.m,
            g.join(" "),
            c.value,
            c.average,
            c.ratio,
            c.average_constant,
            c.value_constant
        ));
    }
    let result = json!({
        "chains": chains.chain_count(),
        "certificates": certs,
        "average_constant_deviation": deviation,
    });
    Ok((result, Some(csv), checks, Value::Null))
}

fn polytope_family(
    config: &ExperimentConfig,
    family: &Family,
    ms: &[u64],
    strategy: &Strategy,
    calibration_sets: usize,
    tol: f64,
) -> Result<Parts> {
    if ms.is_empty() {
        return Err(invalid("ms", "needs at least one modulus"));
    }
    let chains = family.chains()?;
    let d = chains.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let boxes: Vec<TorusSet> = (0..calibration_sets)
        .map(|_| {
            let mut lower = Vec::new();
            let mut upper = Vec::new();
            for _ in 0..d {
                let w: f64 = rng.random_range(0.05..0.9);
                let a: f64 = rng.random_range(0.0..1.0 - w);
                lower.push(a);
                upper.push(a + w);
            }
            TorusSet::from_spec(&SetSpec::Box { lower, upper })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &m in ms {
        let table = PhiTable::new(m, &chains)?;
        let cert = glp::search_with(&table, strategy)?;
        let pts = pointsets::korobov(&cert.g, m)?;
        let spectrum = pts.weyl_spectrum(m as f64)?;
        let bound = erdos_turan::polytope_family_bound(&chains, &spectrum, m as f64)?;
        let constant = bound * m as f64 / (m as f64).ln().powi(d as i32);
        let worst = boxes.iter().map(|b| pts.true_discrepancy(b)).fold(0.0, f64::max);
        rows.push(json!({
            "m": m,
            "g": cert.g,
            "bound": bound,
            "constant": constant,
            "worst_box_discrepancy": worst,
            "calibration_ratio": worst / bound,
        }));
    }
    let constants: Vec<f64> = rows.iter().map(|r| r["constant"].as_f64().unwrap_or(f64::NAN)).collect();
    let fitted_c = rows
        .iter()
        .map(|r| r["calibration_ratio"].as_f64().unwrap_or(f64::NAN))
        .fold(0.0, f64::max);
    let deviation = max_relative_deviation(&constants);
    let mut checks = Vec::new();
    if ms.len() > 1 {
        checks.push(Check::at_most("bound constant deviation", deviation, tol));
    }
    let mut csv = String::from("m,bound,constant,worst_box_discrepancy\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{}\n", r["m"], r["bound"], r["constant"], r["worst_box_discrepancy"]));
    }
    let result = json!({
        "rows": rows,
        "constant_deviation": deviation,
        "fitted_c": fitted_c,
    });
    Ok((result, Some(csv), checks, Value::Null))
}

fn sphere_orbit(k: usize, base: [f64; 3], cap: &Cap, max_degree: usize, delta: f64) -> Result<Parts> {
    let cap = Cap::new(cap.pole, cap.theta)?;
    let words = sphere::enumerate_words(k)?;
    let orbit = sphere::orbit(base, &words)?;
    let (rho, norms) = sphere::rho_hat(&words, max_degree)?;
    let disc = sphere::set_discrepancy(&orbit, &cap);
    let bound = sphere::sphere_bound(words.len(), &cap, delta, rho.max(f64::MIN_POSITIVE))?;
    let mut checks = vec![Check::at_most(
        "|word count - (3*5^k-1)/2|",
        (words.len() as f64 - sphere::word_count(k) as f64).abs(),
        0.0,
    )];
    if k <= 5 {
        checks.push(Check::at_most(
            "repeated matrices",
            (words.len() - sphere::distinct_matrices(&words)) as f64,
            0.0,
        ));
    }
    let m = words.len() as f64;
    let result = json!({
        "m": words.len(),
        "rho_hat": rho,
        "max_degree": max_degree,
        "degree_norms": norms,
        "ramanujan_scaled": rho * m.sqrt() / m.ln(),
        "cap_measure": cap.measure(),
        "discrepancy": disc,
        "bound": bound,
        "ratio_to_bound": disc / bound.grid_min,
    });
    Ok((result, Some(orbit.to_csv()), checks, Value::Null))
}
