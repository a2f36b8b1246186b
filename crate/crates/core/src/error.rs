use std::path::PathBuf;

use crate::config::ConfigError;

/// Failures from the spectral routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix has a materially negative eigenvalue {eigenvalue:e}")]
    NegativeEigenvalue { eigenvalue: f64 },
    #[error("matrix is singular and no positive threshold was given")]
    Singular,
    #[error("threshold must be nonnegative and finite, got {0}")]
    InvalidThreshold(f64),
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Spectral(#[from] SpectralError),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("arm index {arm} out of range for {num_arms} arms")]
    ArmOutOfRange { arm: usize, num_arms: usize },

    #[error("need at least {needed} samples, got {actual}")]
    TooFewSamples { needed: usize, actual: usize },

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this failure category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidInput(_) | Error::Parse(_) => 2,
            Error::Io { .. } => 3,
            Error::Calibration(_) => 4,
            Error::Spectral(_)
            | Error::Dimension { .. }
            | Error::ArmOutOfRange { .. }
            | Error::TooFewSamples { .. }
            | Error::Instance(_) => 5,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
