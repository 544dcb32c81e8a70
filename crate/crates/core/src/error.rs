use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no parseable records in {path} ({rejected} malformed lines)")]
    NoRecords { path: PathBuf, rejected: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("cleaning removed every tweet")]
    EverythingCleaned,

    #[error("coupling matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemiDefinite { min_eigenvalue: f64 },

    #[error("lexicon for topic {topic} lists tags in both support and against: {tags:?}")]
    OverlappingLexicon { topic: String, tags: Vec<String> },

    #[error("topic mismatch: expected {expected}, found {found}")]
    TopicMismatch { expected: String, found: String },

    #[error("class {0} has no examples")]
    MissingClass(String),

    #[error("requested {requested} items but only {available} are available")]
    SampleTooLarge { requested: usize, available: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("model is not trained")]
    UntrainedModel,

    #[error("input has zero probability under every class (alpha = 0 with unseen tokens)")]
    ZeroProbability,

    #[error("feature index {index} out of range for dimension {dim}")]
    DimensionMismatch { index: usize, dim: usize },

    #[error("constant input: {0}")]
    ConstantInput(String),

    #[error("not enough samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("user {0} has no opinionated tweets")]
    NoOpinionatedTweets(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &str) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
