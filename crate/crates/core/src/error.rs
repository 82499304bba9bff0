use thiserror::Error;

/// Errors raised by the simulator and the analytic toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration value violates its invariant.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// An index window falls outside the available samples.
    #[error("range error: {0}")]
    Range(String),
    /// An argument lies outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),
    /// The channel deployment leaves no usable repeating window.
    #[error("geometry error: {0}")]
    Geometry(String),
    /// Two signals do not share the required span on the global timeline.
    #[error("alignment error: {0}")]
    Alignment(String),
    /// Vector lengths disagree or a vector is empty.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// Combiner weights violate the unit-norm, nonnegative constraint.
    #[error("invalid combiner weights: {0}")]
    Weights(String),
    /// Reading or writing experiment files failed.
    #[error("i/o error: {0}")]
    Io(String),
    /// A config file or override could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
