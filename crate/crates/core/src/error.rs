use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("data range is zero; hyperparameters cannot be derived from constant data")]
    DegenerateRange,

    #[error("component {index} lies beyond the realized frontier {frontier}")]
    FrontierViolation { index: usize, frontier: usize },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("factor {value} exceeds the declared bound {bound}")]
    BoundViolation { value: f64, bound: f64 },

    #[error("autocorrelation undefined for a zero-variance series")]
    UndefinedAutocorrelation,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Configuration problems map to exit code 1, everything else to 2.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Parse { .. } | Error::UnsupportedModel(_)
        )
    }
}
