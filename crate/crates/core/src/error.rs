use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid quaternion: {0}")]
    InvalidQuaternion(String),

    #[error("invalid rotation axis: {0}")]
    InvalidAxis(String),

    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("feature file format error: {0}")]
    Format(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("pyramid level {level} out of range (pyramid has {levels} levels)")]
    LevelOutOfRange { level: usize, levels: usize },

    #[error("image too small: {0}")]
    ImageTooSmall(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("external features: {0}")]
    External(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
