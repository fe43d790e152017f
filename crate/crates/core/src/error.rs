use thiserror::Error;

/// Errors raised while validating inputs or evaluating the model.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An input field is out of its valid domain. `field` names the
    /// offending field using the config-file path (e.g. `onoc.phi`).
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    /// The inputs are well formed but the requested analysis has no
    /// closed form for them (e.g. multi-round memory estimate).
    #[error("unsupported model condition: {0}")]
    Unsupported(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
