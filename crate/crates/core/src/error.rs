use thiserror::Error;

/// Errors raised by geometry, flow and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("flow parameters outside the parabolic regime: alpha = {alpha}, beta = {beta}, n = {dim} (need alpha > 0 and beta > -alpha/(n-1))")]
    OutsideRegime { alpha: f64, beta: f64, dim: usize },

    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("degenerate metric: {field} = {value:e} at grid index {index} is below the positivity floor")]
    DegenerateMetric {
        field: &'static str,
        index: usize,
        value: f64,
    },

    #[error("curvature tensor violates its algebraic symmetries (max violation {max_violation:e})")]
    SymmetryViolation { max_violation: f64 },

    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: &'static str },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
