//! Majorant/minorant kernels, generalized Erdős–Turán bounds on the torus and
//! the sphere, and exact discrepancy oracles to check them against.

pub mod erdos_turan;
pub mod error;
pub mod experiment;
pub mod fft;
pub mod glp;
pub mod interp;
pub mod kernel;
pub mod majorant;
pub mod pointsets;
pub mod quadrature;
pub mod sphere;
pub mod stats;
pub mod torus;

pub use erdos_turan::{et_bound, optimal_r, polytope_family_bound, DiscrepancyReport, RRule};
pub use error::{Error, Result};
pub use experiment::{run, Experiment, ExperimentConfig, Outcome};
pub use glp::{congruence_sum, search, GlpCertificate, Strategy};
pub use kernel::{build_bump, build_kernel_table, BumpProfile, KernelConfig, KernelTable};
pub use majorant::{majorant_pair, sandwich_report, MajorantPair, SandwichReport, TrigPolynomial};
pub use pointsets::{PointSet, PointSpec, WeylSpectrum};
pub use sphere::{Cap, HarmonicBlock, RotationWord, SphereOrbit};
pub use torus::{ChainSystem, Polytope, SetSpec, TorusSet};
