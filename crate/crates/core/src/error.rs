//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed trajectory row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("weights file format error: {0}")]
    WeightsFormat(String),

    #[error("weights format version {found} unsupported (expected {expected})")]
    WeightsVersion { found: u32, expected: u32 },

    #[error("tensor shape mismatch for '{name}': expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        name: String,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("model kind mismatch: expected {expected}, found {found}")]
    ModelKindMismatch { expected: String, found: String },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("non-finite loss at epoch {epoch}, batch {batch}: {detail}")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        detail: String,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("map file error: {0}")]
    MapFormat(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
