use thiserror::Error;

use crate::synthesis::SeedDiagnostic;

pub type Result<T> = std::result::Result<T, PstError>;

#[derive(Debug, Error)]
pub enum PstError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigenvalue {index} is degenerate (gap {gap:e})")]
    Degenerate { index: usize, gap: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNotConverged { sweeps: usize, off_norm: f64 },

    #[error("k = {k} and l = {l} must have opposite parity")]
    Parity { k: i64, l: i64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("vertices {u} and {v} are not non-adjacent twins")]
    NotTwins { u: usize, v: usize },

    #[error("initialization failed: {0}")]
    Initialization(String),

    #[error("largest symmetric eigenvalue {0:e} is too close to zero to normalize ratios")]
    DegenerateScale(f64),

    #[error("potential is not good: {0}")]
    NotGoodPotential(String),

    #[error("ratio Jacobian is singular (condition number {condition:e})")]
    JacobianSingular { condition: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("spectrum lost simplicity during iteration (gap {gap:e})")]
    SimplicityLost { gap: f64 },

    #[error("synthesis failed for every seed ({} attempts)", .attempts.len())]
    SynthesisFailure { attempts: Vec<SeedDiagnostic> },

    #[error("factor transfer times differ: {first} vs {second}")]
    TimeMismatch { first: f64, second: f64 },

    #[error("factor {factor} has no state transfer at time {time} (fidelity {fidelity})")]
    FactorFailure {
        factor: usize,
        time: f64,
        fidelity: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl PstError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        PstError::InvalidInput(msg.into())
    }
}
