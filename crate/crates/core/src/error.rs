use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{profile} expects {expected} columns, found {found}")]
    ColumnCount {
        profile: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("unparseable numeric cell {value:?} at row {row}, column {column:?}")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("no column named {0:?}")]
    MissingColumn(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("class {class} has {count} rows, need at least {needed}")]
    ClassTooSmall {
        class: u8,
        count: usize,
        needed: usize,
    },

    #[error("single-class data: both labels 0 and 1 are required")]
    SingleClass,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("zero-variance input; correlation undefined")]
    ZeroVariance,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("non-finite value during training of {model} at epoch {epoch}: {detail}")]
    NonFinite {
        model: &'static str,
        epoch: usize,
        detail: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
