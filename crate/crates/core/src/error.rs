use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {line} has {found} cells, expected {expected}")]
    RaggedRow { line: u64, expected: usize, found: usize },

    #[error("dataset has no instances")]
    EmptyDataset,

    #[error("label column {0:?} not found")]
    MissingLabelColumn(String),

    #[error("row {line} has no class label")]
    MissingLabel { line: u64 },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("split fractions must be positive and sum to 1, got {0:?}")]
    InvalidFractions(Vec<f64>),

    #[error("class {class:?} has {count} instances, fewer than the {parts} requested parts")]
    ClassTooSmall { class: String, count: usize, parts: usize },

    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("class index {index} out of range for {classes} classes")]
    ClassOutOfRange { index: usize, classes: usize },

    #[error("invalid classifier spec: {0}")]
    InvalidSpec(String),

    #[error("invalid cost context: {0}")]
    InvalidContext(String),

    #[error("cannot normalize a context whose {0} sums to zero")]
    ZeroSum(&'static str),

    #[error("dataset is unlabeled; evaluation needs class labels")]
    Unlabeled,

    #[error(
        "full lattice over {m} attributes exceeds the ceiling of {ceiling}; \
         use a backward or random search instead"
    )]
    LatticeTooLarge { m: usize, ceiling: usize },

    #[error("invalid search request: {0}")]
    InvalidSearch(String),

    #[error("no points to work with")]
    EmptyPoints,

    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),

    #[error("invalid result matrix: {0}")]
    InvalidMatrix(String),

    #[error("Nemenyi table covers 2..=10 methods, got {0}")]
    NemenyiRange(usize),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (arguments, config, schema)
    /// rather than by the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}
