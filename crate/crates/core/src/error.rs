use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Matrix inverse requested on a Gram matrix whose condition number
    /// exceeds the degeneracy threshold.
    #[error("near-singular matrix (condition number {cond:.3e})")]
    Degenerate { cond: f64 },

    #[error("gave up after {attempts} degenerate channel draws")]
    TooManyDegenerate { attempts: usize },

    #[error("forward-channel error power {e2_sq} is outside the model (must be < 1)")]
    OutOfModel { e2_sq: f64 },

    #[error("regularizer formula denominator is {denominator:.3e}; parameters outside its validity")]
    InvalidRegularizer { denominator: f64 },

    #[error("unknown figure preset `{0}`")]
    UnknownPreset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
