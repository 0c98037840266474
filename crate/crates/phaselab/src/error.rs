//! Crate-wide error type.

use crate::mesh::DiscreteFunction;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid resolution must be at least 2 subdivisions per axis, got {0}")]
    InvalidResolution(usize),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("integrability exponent must be >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("slope of the discontinuous potential (gamma = 0) is undefined; drive gamma = 0 through continuation")]
    DiscontinuousPotential,

    #[error("borderline integrability regime q = {q} <= n = {n}: the gradient Holder prediction does not apply; use the log-Lipschitz instrument")]
    BorderlineRegime { q: f64, n: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("replacement solve did not converge within {iterations} sweeps (update norm {update_norm:.3e})")]
    ReplacementNonConvergence {
        iterations: usize,
        update_norm: f64,
        last: Box<DiscreteFunction>,
    },

    #[error("fit needs at least 4 usable scales, got {0}")]
    InsufficientScales(usize),

    #[error("free boundary is empty")]
    EmptyFreeBoundary,

    #[error("no positive phase present")]
    NoPositivePhase,

    #[error("truncation level {level} lies below the boundary sup {boundary_sup}")]
    InvalidTruncationLevel { level: f64, boundary_sup: f64 },

    #[error("region has no free interior node")]
    EmptyRegion,

    #[error("the one-phase profile degenerates at gamma = 0; use the jet oracle")]
    UseJetOracle,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
