use thiserror::Error;

use crate::model::ErrorFamily;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A likelihood, covariance or filter produced a non-finite or non-positive quantity.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("family {family:?} is not supported here: {reason}")]
    UnsupportedFamily {
        family: ErrorFamily,
        reason: &'static str,
    },

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// An error raised inside a named module, with context from the caller.
    #[error("[{module}] {context}: {source}")]
    Context {
        module: &'static str,
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn eval(msg: impl Into<String>) -> Self {
        Error::Evaluation(msg.into())
    }

    /// Wraps `self` with the module name and a short description of what was being done.
    pub fn within(self, module: &'static str, context: impl Into<String>) -> Self {
        Error::Context {
            module,
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Name of the innermost module that raised this error, if known.
    pub fn module(&self) -> Option<&'static str> {
        match self {
            Error::Context { module, source, .. } => source.module().or(Some(module)),
            _ => None,
        }
    }
}
