use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported dimension {dim} (at most {max} is supported)")]
    UnsupportedDimension { dim: usize, max: usize },

    #[error("structure violation: {0}")]
    StructureViolation(String),

    #[error("cannot parse {what} `{input}`: {hint}")]
    Parse {
        what: &'static str,
        input: String,
        hint: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
