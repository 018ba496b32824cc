use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown party {0}")]
    UnknownParty(usize),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("network is disconnected")]
    Disconnected,
    #[error("dense limit exceeded: {needed} qubits > limit {limit}")]
    DenseLimit { needed: usize, limit: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn pre<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
