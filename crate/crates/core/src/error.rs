use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of a function.
    #[error("{func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// A series or quadrature failed to reach its tolerance. `partial` is the
    /// best value obtained and `estimate` its absolute error estimate.
    #[error("{what} did not converge (partial value {partial:e}, error estimate {estimate:e})")]
    Numeric {
        what: &'static str,
        partial: f64,
        estimate: f64,
    },

    /// Invalid system configuration; `field` names the offending parameter.
    #[error("invalid configuration `{field}`: {msg}")]
    Config { field: &'static str, msg: String },

    /// The requested method cannot handle the input size.
    #[error("{0}")]
    Capability(String),

    /// A sampler or estimator precondition is violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            func,
            msg: msg.into(),
        }
    }

    pub(crate) fn config(field: &'static str, msg: impl Into<String>) -> Self {
        Error::Config {
            field,
            msg: msg.into(),
        }
    }
}
