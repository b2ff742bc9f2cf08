use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("datum mismatch: {0}")]
    DatumMismatch(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("truncation: {what} needs radius {needed}, table radius is {have}")]
    Truncation { what: String, needed: usize, have: usize },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Verification(_) => 1,
            Error::Config(_) | Error::Parse(_) | Error::DatumMismatch(_) | Error::Domain(_) => 2,
            Error::Truncation { .. } | Error::Resource(_) | Error::Io(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
