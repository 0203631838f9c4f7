use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),

    #[error("measure has no atoms")]
    EmptyMeasure,

    #[error("Gamma function pole at x = {0}")]
    GammaPole(f64),

    #[error("kernel is singular at r = 0")]
    SingularAtOrigin,

    #[error("atoms {0} and {1} coincide; the kernel is singular there")]
    CoincidentAtoms(usize, usize),

    #[error("critical or inadmissible parameter regime: {0}")]
    Regime(String),

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("coupling g = {g} is a spectral boundary point; perturb g and retry")]
    BoundaryCoupling { g: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("atom {index} alone carries J-mass {mass} above the stopping band")]
    HeavyAtom { index: usize, mass: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
