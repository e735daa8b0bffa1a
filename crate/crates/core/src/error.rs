use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs or configuration that violate a documented contract.
    #[error("validation error: {0}")]
    Validation(String),

    /// A point outside the outcome interval.
    #[error("domain error: {value} is outside {domain}")]
    Domain { value: f64, domain: String },

    /// Quadrature or root finding that did not reach its tolerance.
    #[error("numeric error: {message} (achieved {achieved:e}, requested {requested:e})")]
    Numeric {
        message: String,
        achieved: f64,
        requested: f64,
    },

    #[error("parse error in {source_name}: {message}")]
    Parse {
        source_name: String,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(source_name: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            message: msg.into(),
        }
    }
}
