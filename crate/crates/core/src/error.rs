use thiserror::Error;

/// Errors raised by the numerical and combinatorial layers.
///
/// Variants that carry a `residual` report the numerical quantity that
/// crossed its tolerance, so callers can tell a near miss from a gross
/// violation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("precondition failed: {what} (residual {residual:.3e})")]
    Precondition { what: String, residual: f64 },

    #[error("lemma violated: {what} (residual {residual:.3e})")]
    LemmaViolation { what: String, residual: f64 },

    #[error("numerical degeneracy: {what} (residual {residual:.3e})")]
    NumericalDegeneracy { what: String, residual: f64 },

    #[error("sampler assumption violated: {what} (residual {residual:.3e})")]
    SamplerAssumption { what: String, residual: f64 },

    #[error("malformed document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
