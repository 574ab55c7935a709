use thiserror::Error;

/// Errors reported by the link simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration value is outside its valid range. `field` names the
    /// offending parameter so configuration diagnostics can point at it.
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("signal power is zero, SNR is undefined")]
    ZeroSignalPower,

    #[error("failed to parse scenario: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
