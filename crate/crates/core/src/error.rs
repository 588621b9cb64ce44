use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or missing input. `path` locates the offending field.
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A size guard refused the request (e.g. dense propagation too large).
    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("infeasible design: {reason} (residuals: {residuals:?})")]
    Infeasible {
        reason: String,
        residuals: Vec<(String, f64)>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for resource
    /// guards, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Domain(_) => 2,
            Error::ResourceGuard(_) => 3,
            Error::Numerical(_) | Error::Infeasible { .. } => 4,
        }
    }
}
