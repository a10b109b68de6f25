use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A model violates one of its structural invariants.
    #[error("invalid model: {0}")]
    ModelInvalid(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("model has no reductive complement; build it with a coset constructor or call `with_default_complement`")]
    MissingComplement,

    /// A rank or clustering decision fell inside the tolerance band.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("unknown catalog case `{0}`")]
    UnknownCase(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
