use thiserror::Error;

/// Errors raised by the gauge / blade machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("chart error: {0}")]
    Chart(String),

    #[error("point outside the canonical chart: smallest overlap singular value {min_overlap:.3e}")]
    OutOfChart { min_overlap: f64 },

    #[error("{what}: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Inconsistency {
        what: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("form rank error: {0}")]
    Rank(String),

    #[error("rank mismatch: expected {expected}, measured {measured}")]
    RankMismatch { expected: usize, measured: usize },

    #[error("rank is not constant across samples (min {min}, max {max})")]
    RankNotConstant { min: usize, max: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(String),

    #[error("expression error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("gradient flow diverged after {steps} steps; try a smaller step size (eta = {eta})")]
    Divergence { steps: usize, eta: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn inconsistency(what: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Error::Inconsistency {
            what: what.into(),
            residual,
            tolerance,
        }
    }
}
