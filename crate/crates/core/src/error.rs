use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input data (a predicate table, a coupling matrix, a file) failed validation.
    #[error("validation failed: {0}")]
    Validation(String),

    /// A desk-scale guard (enumeration size, disorder memory) would be exceeded.
    #[error("resource guard exceeded: {0}")]
    Resource(String),

    /// The PDE grid cannot resolve the requested mixture.
    #[error("grid diagnostic: {0}")]
    Grid(String),

    #[error("unsupported mode: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource(_) => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
