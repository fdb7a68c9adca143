use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the engine.
///
/// `Validation` covers contract violations in user-supplied data (a complex
/// whose differentials do not square to zero, a chain map whose squares do
/// not commute, dependent point forms). `Internal` marks conditions that a
/// correct implementation can never produce from valid input, such as an
/// unsolvable Koszul lifting system; it is surfaced rather than swallowed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("internal invariant failure: {0}")]
    Internal(String),
}
