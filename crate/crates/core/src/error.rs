use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vocabulary empty after document-frequency filtering (min_df={min_df}, max_df={max_df})")]
    EmptyVocabulary { min_df: f64, max_df: f64 },

    #[error("none of the {0} seed words occur in the vocabulary")]
    NoSeedsInVocabulary(usize),

    #[error("seed list is empty")]
    EmptySeedList,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("negative entry {value} at ({row}, {col}) in {matrix}")]
    NegativeEntry {
        matrix: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("topic row {0} of H sums to zero")]
    DegenerateRow(usize),

    #[error("non-positive version-1 H denominator at cells {cells:?}")]
    NonPositiveDenominator { cells: Vec<(usize, usize)> },

    #[error("non-finite value in {matrix} at iteration {iteration}")]
    NonFinite {
        matrix: &'static str,
        iteration: usize,
    },

    #[error("background corpus has {available} documents, {requested} requested")]
    BackgroundTooSmall { available: usize, requested: usize },

    #[error("topic '{topic}' has {available} words, {requested} needed per injection")]
    TopicTooSmall {
        topic: String,
        available: usize,
        requested: usize,
    },

    #[error("ground-truth distribution '{topic}' sums to {sum}, expected 1")]
    BadDistribution { topic: String, sum: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
