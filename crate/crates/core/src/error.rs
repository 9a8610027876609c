use std::fmt;
use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Which label table a tag belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagKind {
    Pos,
    Ner,
}

impl fmt::Display for TagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagKind::Pos => f.write_str("POS tag"),
            TagKind::Ner => f.write_str("NER type"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector must have at least one element")]
    EmptyVector,

    #[error("non-finite element {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("zero-norm vector for key {0:?}")]
    DegenerateKey(String),

    #[error("{0} requires at least one input")]
    EmptyInput(&'static str),

    #[error("divisor must be at least 1")]
    InvalidDivisor,

    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("{kind} list is empty")]
    EmptyTagList { kind: TagKind },

    #[error("duplicate {kind} {tag:?}")]
    DuplicateTag { kind: TagKind, tag: String },

    #[error("{kind} {tag:?} is not in the codebook")]
    UnknownTag { kind: TagKind, tag: String },

    #[error("invalid token: {0}")]
    InvalidToken(String),

    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error in field {field}: {message}")]
    Parse { field: String, message: String },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("key {0:?} not found")]
    MissingKey(String),

    #[error("space has {size} keys, exhaustive scan is limited to {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("{0}")]
    InsufficientData(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn at_line(self, line: usize) -> Error {
        match self {
            e @ Error::Line { .. } => e,
            e => Error::Line {
                line,
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: io::Error) -> Error {
        Error::File {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
