use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown function id `{id}`; valid ids: {valid}")]
    UnknownFunction { id: String, valid: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid box domain: {0}")]
    InvalidDomain(String),

    #[error("location of the global minimum of `{id}` is unknown")]
    LocationUnknown { id: String },

    #[error("start point lies outside the search domain")]
    InfeasibleStart,

    #[error("reduce over an empty candidate list")]
    EmptyCandidates,

    #[error("invalid `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("evaluation budgets differ: {first} vs {second} evaluations")]
    BudgetMismatch { first: u64, second: u64 },

    #[error("specs target different functions: `{first}` vs `{second}`")]
    FunctionMismatch { first: String, second: String },

    #[error("engine reported {measured} evaluations, expected {expected}")]
    EvaluationCount { expected: u64, measured: u64 },

    #[error("failed to build worker pool: {0}")]
    WorkerPool(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }
}
