use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("empty label set at line {line}")]
    EmptyLabelSet { line: usize },
    #[error("duplicate utterance (session {session}, turn {turn})")]
    DuplicateTurn { session: String, turn: u64 },
    #[error("session {session}: turn indices are not consecutive from 0 (missing turn {missing})")]
    TurnGap { session: String, missing: u64 },
    #[error("fine label {0:?} is not in the taxonomy")]
    UnknownFineLabel(String),
    #[error("invalid taxonomy: {0}")]
    Taxonomy(String),
    #[error("unknown task id {0:?}")]
    UnknownTask(String),
    #[error("unknown model id {0:?}")]
    UnknownModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("line search failed at iteration {iteration}: objective increased at minimal step")]
    StepFailure { iteration: usize },
    #[error("item id mismatch: missing {missing:?}, extra {extra:?}")]
    ItemMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("label {label:?} is outside the label universe of task {task}")]
    LabelOutsideUniverse { label: String, task: String },
    #[error("heterogeneous runs: {0}")]
    Heterogeneous(String),
    #[error("config: {0}")]
    Config(String),
    #[error("serialization: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
