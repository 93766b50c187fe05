use std::path::PathBuf;

use pixdrive_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {0}: expected key=value")]
    Syntax(usize),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    Value { key: String, value: String },
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("duplicate dataset `{0}`")]
    Duplicate(String),
    /// The upload could not be parsed or indexed.
    #[error("{0}")]
    Unprocessable(String),
    #[error("task queue is full")]
    QueueFull,
    #[error("render failed: {0}")]
    RenderFailed(String),
    #[error("service is shutting down")]
    ShuttingDown,
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn status(&self) -> u16 {
        match self {
            ServiceError::BadRequest(_) => 400,
            ServiceError::UnknownDataset(_) => 404,
            ServiceError::Duplicate(_) => 409,
            ServiceError::Unprocessable(_) => 422,
            ServiceError::QueueFull | ServiceError::ShuttingDown => 503,
            ServiceError::RenderFailed(_) | ServiceError::Internal(_) => 500,
        }
    }
}

impl From<CoreError> for ServiceError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ZoomOutOfRange(_)
            | CoreError::InvalidTile { .. }
            | CoreError::InvalidPixel { .. }
            | CoreError::InvalidWidth(_)
            | CoreError::UnknownPattern(_)
            | CoreError::InvalidName(_) => ServiceError::BadRequest(e.to_string()),
            CoreError::UnknownDataset(name) => ServiceError::UnknownDataset(name),
            CoreError::DuplicateDataset(name) => ServiceError::Duplicate(name),
            CoreError::Parse { .. }
            | CoreError::InvalidGeometry { .. }
            | CoreError::NoFeatures
            | CoreError::EmptyInput
            | CoreError::ProjectionOutOfRange { .. } => ServiceError::Unprocessable(e.to_string()),
            other => ServiceError::Internal(other.to_string()),
        }
    }
}
