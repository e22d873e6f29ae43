use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A function singular at an endpoint was sampled there without a
    /// declared finite limit.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A difference stencil left the interval it is defined on.
    #[error("range error: evaluation point {point} outside {interval}")]
    Range { point: f64, interval: &'static str },

    /// A rate fit was requested on too few or invalid samples.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
