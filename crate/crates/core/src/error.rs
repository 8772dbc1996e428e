use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("not a probability distribution: {0}")]
    NotNormalized(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ragged row {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("column `{column}` has more than {cap} distinct values")]
    CardinalityCap { column: String, cap: usize },

    #[error("invalid network description: {0}")]
    InvalidSpec(String),

    #[error("network description is cyclic (involves `{0}`)")]
    CyclicSpec(String),

    #[error("state space of {states} exceeds budget of {budget}")]
    BudgetExceeded { states: u128, budget: u128 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the operating system rather than by the
    /// content of the input.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
