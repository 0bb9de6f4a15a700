use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid of {points} points is too small for ambient size {ambient} (need at least {required})")]
    Sizing {
        points: usize,
        ambient: usize,
        required: usize,
    },

    #[error("invalid frequency set: {0}")]
    InvalidSet(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("statistic undefined: {0}")]
    Undefined(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
