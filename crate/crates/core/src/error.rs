//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its documented domain (nonpositive scale, ρ outside (0,1), ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was called outside its domain of definition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A tail integral does not converge for the requested moment order.
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    /// Root bracketing failed: the objective has the same sign at both ends.
    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    /// The objective evaluated to NaN or infinity during a solve.
    #[error("non-finite evaluation at {at}")]
    NonFinite { at: f64 },

    /// Conformability failure between vectors/matrices.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Every design column was removed by rank detection, or too few rows remain.
    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    /// A matrix that must be inverted is singular.
    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    /// A named column was requested but does not exist among retained coefficients.
    #[error("unknown column: {0}")]
    UnknownColumn(String),

    /// A panel file violates the CSV schema; `line` is the 1-based line in the file.
    #[error("schema violation at line {line}: {message}")]
    Schema { line: usize, message: String },

    /// A simulation target cannot be met by any admissible configuration.
    #[error("infeasible calibration: {0}")]
    Calibration(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
