use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below tolerance")]
    NotPsd { eigenvalue: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("resource limit exceeded: {what} needs {requested}, cap is {cap}")]
    Resource {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("property violated: {0}")]
    Property(String),

    #[error("at grid point {index}: {source}")]
    AtPoint {
        index: usize,
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

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code for a CLI invocation that failed with this error.
    ///
    /// 2 for usage/configuration problems, 3 for resource limits, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Domain(_) | Error::Json(_) | Error::Unsupported(_) => 2,
            Error::Resource { .. } => 3,
            Error::AtPoint { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
