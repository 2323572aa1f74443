use thiserror::Error;

/// Errors raised by constructions and evaluations in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (supported: {1})")]
    UnsupportedDimension(usize, &'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge for {what}: relative change {change:.3e} > {tolerance:.1e}")]
    QuadratureNonConvergent {
        what: &'static str,
        change: f64,
        tolerance: f64,
    },

    #[error("kernel check `{check}` failed: observed {observed:.3e}, allowed {allowed:.3e}")]
    KernelCheck {
        check: &'static str,
        observed: f64,
        allowed: f64,
    },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("grid resolution {grid} too coarse for frequency {freq} (Nyquist guard)")]
    ResolutionInsufficient { grid: usize, freq: i64 },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("lattice size {m} is not a perfect {d}-th power")]
    NotPerfectPower { m: usize, d: usize },

    #[error("rational resonance: |k.x| mod 1 vanishes at k = {0:?}")]
    Resonance(Vec<i64>),

    #[error("request infeasible: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("kernel cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
