use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::dist::codec::DecodeError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("initial point is already stationary (zero gradient norm)")]
    ZeroInitialGradient,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("libsvm parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Decode(#[from] DecodeError),

    #[error("worker {worker} failed: {reason}")]
    WorkerFailed { worker: u32, reason: String },

    #[error("iterate diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("every stepsize in the grid diverged")]
    AllDiverged,

    #[error("i/o error on {path:?}: {source}")]
    PathIo {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
