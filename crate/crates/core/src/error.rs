use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum ParoError {
    #[error("invalid regularizer: {0}")]
    InvalidPar(String),

    #[error("no closed-form proximal map for the {0} family; use prox_oracle or prox_any")]
    NoClosedForm(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("line search exhausted {backtracks} backtracks at iteration {iter} (last step {step:e})")]
    LineSearchExhausted {
        iter: usize,
        backtracks: usize,
        step: f64,
    },

    #[error("objective is +infinity at the starting point")]
    InfiniteStart,

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ParoError {
    /// Short machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            ParoError::InvalidPar(_) => "invalid_par",
            ParoError::NoClosedForm(_) => "no_closed_form",
            ParoError::DimensionMismatch { .. } => "dimension_mismatch",
            ParoError::NonFinite(_) => "non_finite",
            ParoError::LineSearchExhausted { .. } => "line_search_exhausted",
            ParoError::InfiniteStart => "infinite_start",
            ParoError::Factorization(_) => "factorization",
            ParoError::InvalidConfig(_) => "invalid_config",
            ParoError::InvalidDataset(_) => "invalid_dataset",
            ParoError::Io(_) => "io",
            ParoError::Csv(_) => "csv",
            ParoError::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, ParoError>;
