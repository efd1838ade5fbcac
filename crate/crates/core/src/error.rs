use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: malformed files, invalid parameters, contract violations.
    Validation,
    /// The numbers went wrong: non-finite posteriors, failed studies.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate time grid: {0}")]
    DegenerateGrid(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error("invalid dataset: {0}")]
    InvalidData(String),
    #[error("insufficient draws: need at least {needed}, got {got}")]
    InsufficientDraws { needed: usize, got: usize },
    #[error("non-finite log-likelihood at draw {draw}, point {point}")]
    NonFiniteLogLikelihood { draw: usize, point: usize },
    #[error("incomparable models: {0}")]
    IncomparableModels(String),
    #[error("chain initialisation failed: log posterior at the initial point is {0}")]
    Initialization(f64),
    #[error("invalid sampler configuration: {0}")]
    SamplerConfig(String),
    #[error("relative bias is undefined for parameter `{0}` whose true value is zero")]
    UndefinedRelativeBias(String),
    #[error("row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("study failed: {failed} of {total} replicas failed")]
    StudyFailure { failed: usize, total: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NonFiniteLogLikelihood { .. }
            | Error::Initialization(_)
            | Error::Numerical(_)
            | Error::StudyFailure { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Validation,
        }
    }
}
