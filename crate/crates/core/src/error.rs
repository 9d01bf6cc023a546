use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The request is well formed but outside what the engine supports,
    /// e.g. a twisted nonabelian double.
    #[error("out of supported scope: {0}")]
    Scope(String),

    #[error("work budget exceeded: {0}")]
    Budget(String),

    /// Burnside diagonalization could not separate the irreducible characters.
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    /// A mathematical invariant failed. These signal a convention bug and are
    /// never returned as data.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
