//! Error type shared across the library.

/// Errors produced by configuration validation, metric preconditions, and
/// report writing. Simulation hot paths are infallible once their inputs
/// validate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A sweep or game configuration is internally inconsistent.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// An argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A reputation score was requested from a window with no entries.
    /// Cannot occur in valid runs (T0 >= 1 seeds every window); exists as a
    /// guard for direct library use.
    #[error("reputation window is empty")]
    EmptyWindow,
    /// An aggregation was asked for more certainty than the sample supports.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// Report files could not be written.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// CSV serialization failed.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
