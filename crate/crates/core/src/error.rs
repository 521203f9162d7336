use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid too small: n_cells = {0}, need at least 2")]
    GridTooSmall(usize),
    #[error("domain length must be positive and finite, got {0}")]
    BadDomainLength(f64),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("negative conductivity {value} at face {face}")]
    NegativeConductivity { face: usize, value: f64 },
    #[error("shift must be positive, got {0}")]
    NonPositiveShift(f64),
    #[error("gradient undefined on K: d_K(v) = 0")]
    GradientUndefinedOnK,
    #[error("trivial constraint set: both bounds infinite")]
    TrivialConstraintSet,
    #[error("empty interval: lower {lower} > upper {upper}")]
    EmptyInterval { lower: f64, upper: f64 },
    #[error("invalid parameter `{key}`: {message}")]
    InvalidParameter { key: String, message: String },
    #[error("fixed-point iteration did not converge after {iterations} iterations (last residual {residual:e}); dt is too large relative to epsilon/rho")]
    FixedPointDiverged { iterations: usize, residual: f64 },
    #[error("step {step} failed: {source}")]
    StepFailed { step: usize, source: Box<Error> },
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(key: &str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
