//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user-supplied parameter (degree, grading factor, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Structurally broken mesh (non-simple polygon, bad adjacency, ...).
    #[error("invalid mesh: {0}")]
    Mesh(String),

    /// A point lies outside the domain an evaluation expects.
    #[error("domain error: {0}")]
    Domain(String),

    /// Numerical failure during assembly or solve (singular or non-SPD matrix).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
