//! `discrepancy-forge`: runs one experiment and writes its JSON report and CSV data.
//!
//! Exit status: 0 on success, 2 when a check fails or a numerical invariant
//! breaks, 3 on a bad configuration.

mod descriptor;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use discrepancy_core::experiment::Family;
use discrepancy_core::{run, Error, Experiment, ExperimentConfig, Outcome, Strategy};

const EXIT_VIOLATION: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "discrepancy-forge", version, about = "Majorant-based discrepancy bounds and their oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Kernel table cache: a directory, or a single `.json` file.
    #[arg(long, global = true, env = "DISCREPANCY_FORGE_CACHE")]
    kernel_cache: Option<PathBuf>,

    /// Report path. A `.csv` path receives the data table and the JSON report
    /// goes next to it; otherwise the CSV (if any) goes next to the JSON.
    /// Without it the report is printed.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Build (or load) the kernel table and report its diagnostics.
    KernelBuild {
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Check A <= chi <= B and B - A <= psi on a grid.
    Sandwich {
        #[arg(long)]
        set: String,
        #[arg(long = "R")]
        r: f64,
        /// Grid points per axis; defaults to the next power of two >= 4R, at least 64.
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long, default_value_t = 100)]
        claim_points: usize,
        #[arg(long)]
        h_resolution: Option<usize>,
    },
    /// Discrepancy bound for one set and point set.
    Bound {
        #[arg(long)]
        set: String,
        /// lattice:<m>, kronecker:<x1,..>:<m>, korobov:<g1,..>:<m>, or a CSV file.
        #[arg(long)]
        points: String,
        /// A number, auto:<rule> or search:<rule>; rules are lattice, kronecker, glp.
        #[arg(long = "R")]
        r: String,
        #[command(flatten)]
        exponents: Exponents,
    },
    /// Bounds for lattices of growing size and their log-log slope.
    LatticeScaling {
        #[arg(long)]
        set: String,
        #[arg(long = "m", value_delimiter = ',', required = true)]
        ms: Vec<usize>,
        #[command(flatten)]
        exponents: Exponents,
        #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
        target_slope: f64,
        #[arg(long, default_value_t = 0.1)]
        slope_tolerance: f64,
    },
    /// Bounds for Kronecker sets of growing size, with the Schmidt sum check.
    KroneckerScaling {
        #[arg(long)]
        set: String,
        /// Comma-separated generator, numbers or named constants.
        #[arg(long)]
        x: String,
        #[arg(long = "m", value_delimiter = ',', required = true)]
        ms: Vec<usize>,
        #[command(flatten)]
        exponents: Exponents,
        #[arg(long = "schmidt-R", value_delimiter = ',', default_value = "64,128,256,512")]
        schmidt_rs: Vec<f64>,
        #[arg(long, default_value_t = 4.0)]
        schmidt_factor: f64,
        #[arg(long, default_value_t = -0.3, allow_hyphen_values = true)]
        max_slope: f64,
    },
    /// Search for a good lattice point generator g.
    GlpSearch {
        #[command(flatten)]
        glp: GlpArgs,
    },
    /// GLP search plus the polytope-family bound and a calibrated constant.
    PolytopeFamily {
        #[command(flatten)]
        glp: GlpArgs,
        #[arg(long, default_value_t = 20)]
        calibration_sets: usize,
    },
    /// Orbit of a base point under reduced rotation words, and its cap discrepancy.
    SphereOrbit {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "0,0,1")]
        base: String,
        /// Pole x,y,z and angular radius.
        #[arg(long)]
        cap: String,
        #[arg(long = "L", default_value_t = 20)]
        max_degree: usize,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
    /// Run a full experiment config from a JSON file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct Exponents {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
}

#[derive(Args)]
struct GlpArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long = "m", value_delimiter = ',', required = true)]
    ms: Vec<u64>,
    /// `coordinate`, or polytope vertices as a JSON file or inline array.
    #[arg(long = "X", default_value = "coordinate")]
    family: String,
    /// exhaustive, random or korobov-rank1.
    #[arg(long, default_value = "exhaustive")]
    strategy: String,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0.5)]
    constant_tolerance: f64,
}

impl GlpArgs {
    fn family(&self) -> Result<Family, String> {
        descriptor::family(&self.family, self.d)
    }

    fn strategy(&self, seed: u64) -> Result<Strategy, String> {
        match self.strategy.as_str() {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "random" => Ok(Strategy::Random {
                samples: self.samples,
                seed,
            }),
            "korobov-rank1" => Ok(Strategy::KorobovRank1),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

fn dimension(set: &discrepancy_core::SetSpec) -> usize {
    match set {
        discrepancy_core::SetSpec::Box { lower, .. } => lower.len(),
        discrepancy_core::SetSpec::Ball { center, .. } => center.len(),
        discrepancy_core::SetSpec::Polytope { vertices, .. } => vertices.first().map_or(0, |v| v.len()),
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let seed = cli.common.seed;
    let experiment = match &cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(config).map_err(|e| format!("cannot read {}: {e}", config.display()))?;
            let mut parsed = ExperimentConfig::from_json(&text).map_err(|e| format!("bad config: {e}"))?;
            if cli.common.kernel_cache.is_some() {
                parsed.kernel_cache = cli.common.kernel_cache.clone();
            }
            return Ok(parsed);
        }
        Command::KernelBuild { d } => Experiment::KernelBuild { d: *d },
        Command::Sandwich {
            set,
            r,
            grid_n,
            claim_points,
            h_resolution,
        } => Experiment::Sandwich {
            set: descriptor::set(set)?,
            r: *r,
            grid_n: grid_n.unwrap_or_else(|| ((4.0 * r).ceil() as usize).next_power_of_two().max(64)),
            claim_points: *claim_points,
            h_resolution: *h_resolution,
        },
        Command::Bound {
            set,
            points,
            r,
            exponents: e,
        } => {
            let set = descriptor::set(set)?;
            let points = descriptor::points(points, dimension(&set))?;
            Experiment::Bound {
                set,
                points,
                r: descriptor::r_choice(r, e.alpha, e.beta, e.epsilon)?,
            }
        }
        Command::LatticeScaling {
            set,
            ms,
            exponents: e,
            target_slope,
            slope_tolerance,
        } => Experiment::LatticeScaling {
            set: descriptor::set(set)?,
            ms: ms.clone(),
            alpha: e.alpha,
            beta: e.beta,
            target_slope: *target_slope,
            slope_tolerance: *slope_tolerance,
        },
        Command::KroneckerScaling {
            set,
            x,
            ms,
            exponents: e,
            schmidt_rs,
            schmidt_factor,
            max_slope,
        } => Experiment::KroneckerScaling {
            set: descriptor::set(set)?,
            x: x.split(',').map(descriptor::real).collect::<Result<_, _>>()?,
            ms: ms.clone(),
            alpha: e.alpha,
            beta: e.beta,
            epsilon: e.epsilon,
            schmidt_rs: schmidt_rs.clone(),
            schmidt_factor: *schmidt_factor,
            max_slope: *max_slope,
        },
        Command::GlpSearch { glp } => Experiment::GlpSearch {
            family: glp.family()?,
            ms: glp.ms.clone(),
            strategy: glp.strategy(seed)?,
            constant_tolerance: glp.constant_tolerance,
        },
        Command::PolytopeFamily { glp, calibration_sets } => Experiment::PolytopeFamily {
            family: glp.family()?,
            ms: glp.ms.clone(),
            strategy: glp.strategy(seed)?,
            calibration_sets: *calibration_sets,
            constant_tolerance: glp.constant_tolerance,
        },
        Command::SphereOrbit {
            k,
            base,
            cap,
            max_degree,
            delta,
        } => Experiment::SphereOrbit {
            k: *k,
            base: descriptor::vector3(base)?,
            cap: descriptor::cap(cap)?,
            max_degree: *max_degree,
            delta: *delta,
        },
    };
    Ok(ExperimentConfig {
        kernel_cache: cli.common.kernel_cache.clone(),
        seed,
        ..ExperimentConfig::new(experiment)
    })
}

fn is_violation(e: &Error) -> bool {
    matches!(
        e,
        Error::KernelCheck { .. } | Error::QuadratureNonConvergent { .. } | Error::Numerical(_)
    )
}

fn write(outcome: &Outcome, out: Option<&Path>) -> Result<(), Error> {
    let Some(out) = out else {
        println!("{}", outcome.report_json());
        return Ok(());
    };
    if out.extension().is_some_and(|e| e == "csv") {
        outcome.write(&out.with_extension("json"), Some(out))
    } else {
        outcome.write(out, Some(&out.with_extension("csv")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let outcome = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if is_violation(&e) { EXIT_VIOLATION } else { EXIT_CONFIG });
        }
    };
    if let Err(e) = write(&outcome, cli.common.out.as_deref()) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    if outcome.passed() {
        return ExitCode::SUCCESS;
    }
    for c in outcome.failures() {
        eprintln!("check failed: {} observed {:.6e}, allowed {:.6e}", c.name, c.observed, c.allowed);
    }
    ExitCode::from(EXIT_VIOLATION)
}
