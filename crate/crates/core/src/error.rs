//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed descriptor bytes at offset {offset}: {reason}")]
    DescriptorParse { offset: usize, reason: String },

    #[error("unresolved type reference `{type_name}` (referenced from {referrer})")]
    UnresolvedType { type_name: String, referrer: String },

    #[error("unknown message type `{0}`")]
    UnknownType(String),

    #[error("unknown field `{field}` in message `{message}`")]
    UnknownField { message: String, field: String },

    #[error("wire decode error at offset {offset}: {reason}")]
    WireDecode { offset: usize, reason: String },

    #[error("corpus quality: {malformed} of {total} records malformed (threshold {threshold})")]
    CorpusQuality {
        malformed: usize,
        total: usize,
        threshold: f64,
    },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("no comparable fields between generated and reference data")]
    NoComparableFields,

    #[error("unsupported format `{0}`")]
    UnsupportedFormat(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
