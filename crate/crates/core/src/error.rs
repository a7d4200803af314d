use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpiError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("boundary error: {0}")]
    Boundary(String),

    #[error("group mismatch: {left} vs {right}")]
    GroupMismatch { left: String, right: String },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("unsupported group {0}: closed form is only known for abelian 2-groups")]
    UnsupportedGroup(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, EpiError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(EpiError::Domain(msg.into()))
}
