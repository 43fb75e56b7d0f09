use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the VIVI pipeline.
#[derive(Debug, Error)]
pub enum VividError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("empty dataset: {0}")]
    EmptyData(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("`{0}` is the response column, not a predictor")]
    ResponseNotPredictor(String),
    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("missing value in column `{column}` at row {row}")]
    MissingValue { column: String, row: usize },
    #[error("column `{column}` row {row}: `{value}` is not a finite number")]
    NotNumeric {
        column: String,
        row: usize,
        value: String,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("column mismatch: {0}")]
    ColumnMismatch(String),
    #[error("prediction error: {0}")]
    Prediction(String),
    #[error("external predictor: {0}")]
    External(String),
    #[error("unsupported response: {0}")]
    UnsupportedResponse(String),
    #[error("variable set mismatch: {0}")]
    VarMismatch(String),
    #[error("no edge exceeds the cutoff {0}")]
    EmptyGraph(f64),
    #[error("missing surface for pair ({0}, {1})")]
    MissingSurface(String, String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, VividError>;

pub(crate) fn invalid(msg: impl Into<String>) -> VividError {
    VividError::InvalidArgument(msg.into())
}
