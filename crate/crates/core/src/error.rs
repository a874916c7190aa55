use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid choice vector: {0}")]
    InvalidChoice(String),

    #[error("alpha must exceed -1 (got {0})")]
    AlphaOutOfRange(f64),

    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),

    #[error("duplicate initial locations: {0} appears more than once")]
    DuplicateLocations(f64),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("bisection did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("trajectory has {found} checkpoints, need at least {needed}")]
    TooFewCheckpoints { found: usize, needed: usize },

    #[error("parameter mismatch: {0}")]
    Mismatch(String),

    #[error("unknown figure `{0}` (available: {1})")]
    UnknownFigure(String, String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
