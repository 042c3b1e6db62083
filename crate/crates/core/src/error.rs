use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    /// p-means are only unique for exponents strictly above one.
    #[error("unsupported exponent p = {0}: the p-mean is unique only for p > 1")]
    UnsupportedExponent(f64),

    #[error("index (m = {m}, n = {n}) lies outside the representable window")]
    OutOfWindow { m: i64, n: i64 },

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("construction failure at element {element}: {condition} not met after {iterations} halvings")]
    ConstructionFailure {
        element: usize,
        condition: String,
        iterations: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
