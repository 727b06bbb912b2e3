use thiserror::Error;

use crate::corpus::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rating {0}: stars must be within 1..=5")]
    InvalidRating(i64),

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("insufficient {class} instances: need {needed}, have {available}")]
    InsufficientClass {
        class: Label,
        needed: usize,
        available: usize,
    },

    #[error("invalid split size {0}: must be even")]
    OddSplitSize(usize),

    #[error("invalid k={k} for {points} points")]
    InvalidK { k: usize, points: usize },

    #[error("invalid m={m}: split holds {available} instances")]
    InvalidM { m: usize, available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing instance {0}")]
    MissingInstance(String),

    #[error("invalid taxonomy: {}", .0.join("; "))]
    InvalidTaxonomy(Vec<String>),

    #[error("justification rejected: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Rejected(Vec<crate::knowledge::Violation>),

    #[error("invalid coverage assignment: unknown topic {0:?}")]
    InvalidAssignment(String),

    #[error("invalid rating matrix: {0}")]
    InvalidMatrix(String),

    #[error("unsupported schema version {found} (this build reads version {supported})")]
    VersionMismatch { found: u32, supported: u32 },

    #[error("corrupt file: {0}")]
    Corrupt(String),

    #[error("unknown condition {0:?}")]
    UnknownCondition(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
