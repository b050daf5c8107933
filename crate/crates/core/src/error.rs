use thiserror::Error;

/// Failure categories shared by every module. The CLI maps the category to an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis is rank deficient")]
    RankDeficient,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("budget exceeded: {what} needs {needed} > limit {limit}")]
    Budget { what: String, needed: String, limit: String },
    #[error("capability exceeded: {0}")]
    Capability(String),
    #[error("no vector found within the requested radius")]
    NotFound,
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
    pub fn budget(what: impl Into<String>, needed: impl ToString, limit: impl ToString) -> Self {
        Error::Budget { what: what.into(), needed: needed.to_string(), limit: limit.to_string() }
    }

    /// Process exit code: 2 check failure, 3 capability or budget, 4 configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CheckFailed(_) | Error::NotFound | Error::Generation(_) => 2,
            Error::Budget { .. } | Error::Capability(_) | Error::Precondition(_) => 3,
            Error::RankDeficient | Error::InvalidInput(_) | Error::Parse(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
