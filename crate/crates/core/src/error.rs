use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid lexicon, line {line}: {message}")]
    Lexicon { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training data contains a single class; at least two are required")]
    SingleClass,

    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("class {0} has no training samples")]
    MissingClass(usize),

    #[error("{0}")]
    InvalidInput(String),

    #[error("binary model is not calibrated")]
    Uncalibrated,

    #[error("pairwise probability r[{i}][{j}] = {value} is outside [0, 1]")]
    InvalidProbability { i: usize, j: usize, value: f64 },

    #[error("pairwise weight n[{i}][{j}] = {value} is not positive")]
    InvalidWeight { i: usize, j: usize, value: f64 },

    #[error("unsupported model format version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },

    #[error("schema mismatch: model schema {model}, data schema {data}")]
    SchemaMismatch { model: String, data: String },

    #[error("utterance is not labeled (dialogue {dialogue}, turn {turn}, utterance {utterance})")]
    Unlabeled {
        dialogue: String,
        turn: usize,
        utterance: usize,
    },

    #[error("dialogue {0} has no utterances")]
    EmptyDialogue(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("grammar: {0}")]
    Grammar(String),

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
