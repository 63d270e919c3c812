use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported composition: {0}")]
    UnsupportedComposition(String),
    #[error("invalid identification: {0}")]
    InvalidIdentification(String),
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
    #[error("search failed: {0}")]
    SearchFailed(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
