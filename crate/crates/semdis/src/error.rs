//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by parsing, construction and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("unknown token `{0}`")]
    UnknownToken(String),

    #[error("duplicate token `{0}` in vocabulary")]
    DuplicateToken(String),

    #[error("vocabulary is empty")]
    EmptyVocabulary,

    #[error("non-positive weight {weight} for `{from}` -> `{to}`")]
    NonPositiveWeight {
        from: String,
        to: String,
        weight: f64,
    },

    #[error("duplicate edge `{from}` -> `{to}`")]
    DuplicateEdge { from: String, to: String },

    #[error("self loop on `{0}`")]
    SelfLoop(String),

    #[error("duplicate feature `{feature}` for concept `{concept}` at line {line}")]
    DuplicateFeature {
        concept: String,
        feature: String,
        line: usize,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("vocabularies have no token in common")]
    EmptyIntersection,

    #[error("node `{0}` has no outgoing edges")]
    DanglingNode(String),

    #[error("network has no nodes left")]
    EmptyNetwork,

    #[error("network has no edges")]
    NoEdges,

    #[error("run count must be at least 1")]
    InvalidRunCount,

    #[error("neighbor list longer than l={l}: {found} entries")]
    LengthMismatch { l: usize, found: usize },

    #[error("networks cover different vocabularies: {0}")]
    VocabularyMismatch(String),

    #[error("non-finite value {value} at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize, value: f64 },

    #[error("probability {value} out of [0, 1] at row {row}, column {col}")]
    InvalidProbability { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, above 1")]
    InvalidRowSum { row: usize, sum: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
