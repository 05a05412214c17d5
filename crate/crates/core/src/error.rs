use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    /// A class became too small to split further.
    #[error("refinement exhausted: {0}")]
    RefinementExhausted(String),

    #[error("input too small: {0}")]
    InputTooSmall(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("database already holds a different entry with id `{0}`")]
    DuplicateId(String),

    #[error("database is empty")]
    EmptyDatabase,

    #[error("vertex {target} is unreachable from vertex {origin}")]
    Unreachable { origin: usize, target: usize },

    #[error("group {0} has no members")]
    EmptyGroup(usize),

    #[error("every restart collapsed to a partition with empty groups")]
    DegenerateFit,

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("replay changed {0}")]
    ReplayMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable category, used for process exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Precondition(_) => "precondition",
            Error::Config(_) => "config",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InvalidSpec(_) => "invalid-spec",
            Error::RefinementExhausted(_) => "refinement-exhausted",
            Error::InputTooSmall(_) => "input-too-small",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::DuplicateId(_) => "duplicate-id",
            Error::EmptyDatabase => "empty-database",
            Error::Unreachable { .. } => "unreachable",
            Error::EmptyGroup(_) => "empty-group",
            Error::DegenerateFit => "degenerate-fit",
            Error::Numeric(_) => "numeric",
            Error::Parse { .. } => "parse",
            Error::ReplayMismatch(_) => "replay-mismatch",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
