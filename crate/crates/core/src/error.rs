use thiserror::Error;

use crate::model::SubjectId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("subject `{label}` appears more than once")]
    DuplicateSubject { label: String },

    #[error("item `{label}` is not in the declared catalog")]
    UnknownItem { label: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{kind} index {index} out of range (size {size})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        size: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cluster has no members")]
    EmptyCluster,

    #[error("subject {0} has an empty selection")]
    DegenerateSubject(SubjectId),

    #[error("a secondary cluster needs at least two clusters")]
    NoSecondaryCluster,

    #[error("inconsistent inputs: {0}")]
    Consistency(String),

    #[error("exhaustive oracle is limited to {limit} items, got {items}")]
    InfeasibleOracle { items: usize, limit: usize },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn item_index(index: usize, size: usize) -> Self {
        Error::IndexOutOfRange {
            kind: "item",
            index,
            size,
        }
    }

    pub(crate) fn subject_index(index: usize, size: usize) -> Self {
        Error::IndexOutOfRange {
            kind: "subject",
            index,
            size,
        }
    }
}
