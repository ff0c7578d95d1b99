use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A dataset line failed to parse or violated the schema. Lines are
    /// 1-indexed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate topic id `{0}`")]
    DuplicateTopicId(String),

    #[error("vocabulary is empty after filtering")]
    EmptyVocabulary,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),

    #[error("invalid gamma: {0}")]
    InvalidGamma(String),

    #[error("positivity violated: {0}")]
    PositivityViolated(String),

    #[error("missing human judgments: {0}")]
    MissingJudgments(String),

    #[error("too few topics: have {have}, need {need}")]
    TooFewTopics { have: usize, need: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

pub type Result<T> = std::result::Result<T, Error>;
