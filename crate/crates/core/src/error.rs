use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("csv file has no header row")]
    MissingHeader,
    #[error("column `{0}` does not start with `iwp:` or `dwp:`")]
    UnprefixedColumn(String),
    #[error("cannot parse cell at row {row}, column {col}")]
    ParseError { row: usize, col: usize },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("feature column {0} is constant")]
    ConstantColumn(usize),
    #[error("polynomial degree {0} outside [0, 6]")]
    DegreeOutOfRange(usize),
    #[error("need at least 2 rows to split, each part non-empty (got {0})")]
    TooFewRows(usize),
    #[error("datasets have mismatching feature or target names")]
    SchemaMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("training diverged at iteration {iteration}")]
    Diverged {
        iteration: usize,
        /// Trace records of the iterations completed before the failure.
        partial: Box<Option<crate::block::TrainingTrace>>,
    },
    #[error("block `{block}` diverged at iteration {iteration}")]
    BlockDiverged { block: String, iteration: usize },
    #[error("invalid meta-parameter: {0}")]
    InvalidMeta(String),
    #[error("empty input")]
    Empty,
    #[error("every target value is zero")]
    AllTargetsZero,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("input is constant")]
    ConstantInput,
    #[error("model file format error: {0}")]
    FormatError(String),
    #[error("config error: {0}")]
    ConfigError(String),
    #[error("io error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for the divergence variants.
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Diverged { .. } | Error::BlockDiverged { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
