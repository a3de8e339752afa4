use std::io;

use thiserror::Error;

/// Errors produced by the library.
///
/// The CLI maps [`Error::is_user_error`] variants to exit code 1 and the
/// rest to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid staging: {0}")]
    Staging(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("conditioning event has probability zero: {0}")]
    ZeroProbability(String),

    #[error("enumeration of {cells} cells exceeds the limit of {limit}")]
    EnumerationTooLarge { cells: u128, limit: u128 },

    #[error("intervention has empty support: {0}")]
    EmptySupport(String),

    #[error("undefined stage (no data): {0}")]
    UndefinedStage(String),

    #[error("no stratum satisfies positivity: {0}")]
    NoIdentifiableStrata(String),

    #[error("degenerate propensity: {0}")]
    DegeneratePropensity(String),

    #[error("IRLS did not converge after {iterations} iterations (max coefficient change {max_change:e})")]
    Convergence { iterations: usize, max_change: f64 },

    #[error("bootstrap failed: {failed} of {total} replicates failed (first failure: {first})")]
    Bootstrap {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by a failure inside
    /// the computation.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Schema(_)
                | Error::Data(_)
                | Error::Staging(_)
                | Error::Model(_)
                | Error::InvalidArgument(_)
                | Error::Unsupported(_)
                | Error::ZeroProbability(_)
                | Error::EmptySupport(_)
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
