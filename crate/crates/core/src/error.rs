use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated an operation's precondition.
    #[error("invalid input: {0}")]
    Validation(String),

    /// An argument fell outside the support of a law.
    #[error("{what} = {value} outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A quantity diverges at the requested parameters (β = 0 or T = 0).
    #[error("{0} diverges at the requested parameters")]
    Divergence(&'static str),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("cannot bin sample for the chi-square test: {0}")]
    Binning(String),

    #[error("event expression parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    /// Relaxation ran out of iterations; `trace` holds the per-iteration
    /// maximum deviation from the Fermi target.
    #[error("no convergence after {iterations} iterations (last error {last_error:e})")]
    NonConvergence {
        iterations: usize,
        last_error: f64,
        trace: Vec<f64>,
    },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
