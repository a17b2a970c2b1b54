use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the library.
///
/// Variants split into two families: invalid input (`Invalid*`) and numerical
/// failures. The CLI maps the first family to exit code 2 and the second to 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix size n = {n} is not a multiple of the block size p = {p}")]
    NotDivisible { n: usize, p: usize },

    #[error("matrix size n = {n} is too small for block size p = {p} (need n >= 2p)")]
    TooSmall { n: usize, p: usize },

    #[error("{iterations} iterations without convergence (worst residual {worst_residual:e})")]
    NoConvergence { iterations: usize, worst_residual: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error(
        "the limiting density needs a positive definite A0, but these gamma weights give an \
         indefinite one (smallest eigenvalue {min_eigenvalue:e})"
    )]
    IndefiniteModel { min_eigenvalue: f64 },

    #[error("singular matrix at stage {stage}")]
    Singular { stage: usize },

    #[error("{0}")]
    Normalization(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::NotDivisible { .. }
                | Error::TooSmall { .. }
                | Error::Parse(_)
                | Error::IndefiniteModel { .. }
        )
    }
}
