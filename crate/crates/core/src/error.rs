use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("model must have at least one word and one dimension")]
    EmptyModel,

    #[error("duplicate token `{0}`")]
    DuplicateToken(String),

    #[error("invalid token {0:?}: tokens must be non-empty and contain no whitespace")]
    InvalidToken(String),

    #[error("truncated payload: expected {expected} rows, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("line {line}: expected {expected} columns, found {found}")]
    InconsistentColumns {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: non-numeric field {field:?}")]
    NonNumeric { line: usize, field: String },

    #[error("non-finite value in vector for `{0}`")]
    NonFinite(String),

    #[error("zero vector for `{0}`")]
    ZeroVector(String),

    #[error("unknown token `{0}`")]
    UnknownToken(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("bad query: {0}")]
    BadQuery(String),

    #[error("query vector is zero")]
    ZeroComposite,

    #[error("at least two distinct tokens are required")]
    TooFewTokens,

    #[error("duplicate term `{0}` in refit request")]
    DuplicateTerm(String),

    #[error("target `{0}` also appears in the group")]
    TargetInGroup(String),

    #[error("invalid refit request: {0}")]
    InvalidRefit(String),

    #[error("zero denominator while updating `{0}` (alpha = 0 and no neighbours)")]
    ZeroDenominator(String),

    #[error("action log is empty")]
    EmptyLog,

    #[error("log does not belong to this model: {0}")]
    LineageMismatch(String),

    #[error("model moved from revision {expected} to {found} while the refit was computed")]
    StaleRevision { expected: u64, found: u64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
