use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the geometry, measure and estimator layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("depth {depth} exceeds the limit of {limit}")]
    DepthLimit { depth: usize, limit: usize },

    #[error("point {point} lies outside the open unit disc")]
    OutsideDisc { point: Complex64 },

    #[error("boundary curve rejected: {0}")]
    InvalidCurve(String),

    #[error("non-finite value {value} at {point}")]
    NonFinite { point: Complex64, value: f64 },

    #[error("quasi-hyperbolic graph is disconnected between {from} and {to}")]
    Disconnected { from: Complex64, to: Complex64 },

    #[error("point {0} is not covered by the Whitney cover")]
    NotCovered(Complex64),

    #[error("no exterior point with clearance >= R/16 near {vertex} (best ratio {best_ratio:.4})")]
    NoExteriorPoint { vertex: Complex64, best_ratio: f64 },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
