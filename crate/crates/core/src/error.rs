use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no transactions")]
    NoTransactions,

    #[error("cannot split: need at least 2 transactions, got {0}")]
    CannotSplit(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown item id {0}")]
    UnknownItem(u32),

    #[error("unknown item label {0:?}")]
    UnknownLabel(String),

    #[error("no minimum support for item {0}")]
    UnresolvedItem(u32),

    #[error("oracle too large: {0} items (limit {limit})", limit = crate::counting::ORACLE_MAX_ITEMS)]
    OracleTooLarge(usize),

    #[error("undefined confidence: antecedent has zero support")]
    UndefinedConfidence,

    #[error("undefined lift: consequent has zero support")]
    UndefinedLift,

    #[error("invalid rule chain: {0}")]
    InvalidChain(String),

    #[error("support index has no count for itemset {0:?}")]
    MissingSupport(Vec<u32>),

    #[error("rule cap of {0} exceeded")]
    RuleCapExceeded(usize),

    #[error("algorithm {algorithm} expects {expected}")]
    AlgorithmMismatch {
        algorithm: &'static str,
        expected: &'static str,
    },

    #[error("degenerate index: every sum is zero")]
    Degenerate,

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
