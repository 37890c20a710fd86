use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("in-plane angle undefined at layer {layer}: spin points along the film normal")]
    AngleUndefined { layer: usize },

    #[error("magnetization resultant vanishes; angle undefined")]
    ZeroResultant,

    #[error("spin is not unit length (|m| = {norm:.15})")]
    NonUnitSpin { norm: f64 },

    #[error("no transition found: {0}")]
    NotFound(String),

    #[error("θ_a grid mismatch: {0}")]
    GridMismatch(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
