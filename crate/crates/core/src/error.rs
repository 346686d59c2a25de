use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by model validation, numerics and the detection harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("AR polynomial is not stationary: root moduli {moduli:?} must exceed 1")]
    NonStationary { moduli: Vec<f64> },

    #[error("innovation standard deviation must be finite and positive, got {0}")]
    InvalidSigma(f64),

    #[error("psi weights did not fall below {tol:e} within {cap} terms")]
    TruncationFailure { tol: f64, cap: usize },

    #[error("covariance matrix is not positive definite (pivot {index})")]
    NotPositiveDefinite { index: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("beta = {beta} is not on the grid i/{n}")]
    BetaNotOnGrid { beta: f64, n: usize },

    #[error("MA coefficients sum to -1; the limiting precision is singular")]
    DegenerateMa,

    #[error("moment generating function is infinite at theta = {theta}")]
    OutsideDomain { theta: f64 },

    #[error("Legendre objective increases up to the edge of the theta domain")]
    NoMaximizer,

    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("variance test needs sigma != tau (both {0})")]
    EqualVariances(f64),

    #[error("scale test needs f != 1")]
    UnitScale,

    #[error("could not bracket the threshold root: {0}")]
    BracketingFailure(String),

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("series of length {len} is shorter than window {window}")]
    SeriesTooShort { len: usize, window: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
