use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the domain where the quantity is defined or the
    /// bounds are proven.
    #[error("domain error: {0}")]
    Domain(String),

    /// A coefficient family or run configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A sign could not be decided by the available certificates.
    #[error(
        "certification failure at theta = {theta:.15}: |value| = {value:.3e} does not exceed \
         radius {radius:.3e} (a_trunc = {a_trunc}); raise the truncation level"
    )]
    Uncertified {
        theta: f64,
        value: f64,
        radius: f64,
        a_trunc: u64,
    },

    /// A structural expectation (zero count, bracket order) was violated.
    #[error("structural failure: {0}")]
    Structural(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
