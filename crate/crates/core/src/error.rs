use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the numerical kernels, the Krylov driver and the lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry in {context} at ({row}, {col})")]
    NonFinite {
        context: &'static str,
        row: usize,
        col: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    NoConvergence { rows: usize, cols: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("minimum relative gap is zero; perturb the input (smooth_perturb) before requesting an iteration count")]
    ZeroGap,

    #[error(transparent)]
    Io(#[from] crate::io::IoError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}

/// Attaches a path to an I/O failure.
pub(crate) fn io_at(path: &std::path::Path, source: std::io::Error) -> crate::io::IoError {
    crate::io::IoError::Io {
        path: PathBuf::from(path),
        source,
    }
}
