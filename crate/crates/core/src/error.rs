use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GchError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("numerical failure at t = {t}: {reason}")]
    NumericalFailure { t: f64, reason: String },

    #[error("degenerate field: {0}")]
    Degenerate(&'static str),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("mollifier ρ_{n} under-resolved: need h <= {max_h}, grid has h = {h}")]
    Unresolved { n: u32, h: f64, max_h: f64 },

    #[error("{side} run failed: {source}")]
    RunFailed {
        side: &'static str,
        #[source]
        source: Box<GchError>,
    },
}

pub type Result<T> = std::result::Result<T, GchError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> GchError {
    GchError::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
