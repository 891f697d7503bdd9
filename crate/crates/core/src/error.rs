use thiserror::Error;

/// Library-wide error type. Every variant names the offending parameter or
/// context so callers can surface actionable messages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in `{param}`: {message}")]
    Domain { param: &'static str, message: String },

    #[error("`{param}` out of range: {message}")]
    Range { param: &'static str, message: String },

    #[error("resource limit exceeded for `{param}`: {message}")]
    Resource { param: &'static str, message: String },

    /// Cancellation or tolerance demands exceed the working precision.
    /// `suggested_digits` is always a sufficient setting per the precision
    /// elevation rules.
    #[error("precision exhausted in {context}: raise digits to at least {suggested_digits}")]
    PrecisionExhausted {
        context: &'static str,
        suggested_digits: u32,
    },

    #[error("series in {context} did not meet the tail tolerance within {max_terms} terms")]
    NonConvergence {
        context: &'static str,
        max_terms: usize,
    },

    #[error("singular interface matching at E = {energy}: bound state or resonance")]
    Singular { energy: f64 },

    #[error("cache corrupt at line {line}: {message}")]
    CacheCorrupt { line: usize, message: String },

    #[error("parse error in `{param}`: {message}")]
    Parse { param: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(param: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            param,
            message: message.into(),
        }
    }

    pub fn range(param: &'static str, message: impl Into<String>) -> Self {
        Error::Range {
            param,
            message: message.into(),
        }
    }

    pub fn resource(param: &'static str, message: impl Into<String>) -> Self {
        Error::Resource {
            param,
            message: message.into(),
        }
    }

    pub fn parse(param: &'static str, message: impl Into<String>) -> Self {
        Error::Parse {
            param,
            message: message.into(),
        }
    }
}
