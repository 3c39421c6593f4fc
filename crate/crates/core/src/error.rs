use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("entry ({row},{col}) has modulus {modulus:.3e}, too close to zero")]
    ZeroEntry {
        row: usize,
        col: usize,
        modulus: f64,
    },

    #[error("entry ({row},{col}) has modulus {modulus}, not unimodular within {tol:.1e}")]
    NonUnimodular {
        row: usize,
        col: usize,
        modulus: f64,
        tol: f64,
    },

    #[error("no unimodular completion exists: |sigma| = {sigma_abs} > 1")]
    NoCompletion { sigma_abs: f64 },

    #[error("parameter t = {t} is within {eps:.1e} of a singular point (x = ±i)")]
    SingularParameter { t: f64, eps: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("family validation failed at parameters {params:?}: gram residual {residual:.3e}")]
    ValidationFailed { params: Vec<f64>, residual: f64 },

    #[error("equivalence search supports order <= {max}, got {n}")]
    OrderTooLarge { n: usize, max: usize },

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
