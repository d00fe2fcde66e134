use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to meet its accuracy target.
    #[error("non-convergence: {what} (estimate {estimate:.3e}, tolerance {tolerance:.3e})")]
    NonConvergence {
        what: String,
        estimate: f64,
        tolerance: f64,
    },

    /// Malformed tabulated input.
    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
