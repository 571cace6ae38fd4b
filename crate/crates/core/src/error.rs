use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("occupation {occupation} of mode `{mode}` exceeds cutoff {cutoff}")]
    CutoffExceeded {
        mode: String,
        occupation: usize,
        cutoff: usize,
    },

    #[error("amplitude vector has zero norm")]
    DegenerateState,

    #[error("mode `{0}` already exists in the registry")]
    ModeExists(String),

    #[error("unknown mode `{0}`")]
    UnknownMode(String),

    #[error("event probability {0:e} is below the conditioning threshold")]
    ZeroProbabilityEvent(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("thermal mean diverges: efficiency {efficiency} with dark-count probability {dark_count}")]
    DivergentThermalMean { efficiency: f64, dark_count: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
