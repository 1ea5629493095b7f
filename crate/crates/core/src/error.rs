use thiserror::Error;

/// Errors produced by generators, filters and experiment scenarios.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (bad coefficients, unsupported register length, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A signal file could not be ingested.
    #[error("ingestion error: {0}")]
    Ingestion(String),

    /// An operation was called outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The adaptive filter blew up. Carries the sample index at which the
    /// guard tripped and the weight norm observed there.
    #[error("filter diverged at sample {sample}: weight norm {norm:.3e} (mu={mu}, dag ssg={ssg})")]
    Divergence {
        sample: usize,
        norm: f64,
        mu: f64,
        ssg: f64,
    },

    /// A numeric step failed (singular solve, non-finite intermediate).
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
