use std::path::PathBuf;

/// Errors produced by the axle detection toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid passage: {0}")]
    InvalidPassage(String),

    #[error("crossing index {index} for axle {axle}, sensor {sensor} lies outside the recording of {n_samples} samples")]
    OutOfRange {
        axle: usize,
        sensor: usize,
        index: i64,
        n_samples: usize,
    },

    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("recording too short: {0}")]
    DurationTooShort(String),

    #[error("scale {scale} needs a {support}-sample wavelet, more than 10x the {len}-sample signal")]
    ScaleTooLarge { scale: f64, support: usize, len: usize },

    #[error("window of {len} samples is shorter than the minimum of {min}")]
    WindowTooShort { len: usize, min: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("training diverged at epoch {epoch}, step {step}: loss = {loss}")]
    TrainingDiverged { epoch: usize, step: usize, loss: f64 },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
