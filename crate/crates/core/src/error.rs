use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or input field failed validation. `key` names the offending field.
    #[error("invalid `{key}`: {message}")]
    Validation { key: String, message: String },

    /// An argument lies outside the domain where the quantity is defined.
    #[error("`{key}` outside domain: {message}")]
    Domain { key: String, message: String },

    /// The design matrix of a regression is singular.
    #[error("rank-deficient design: `{first}` is collinear with `{second}`")]
    RankDeficient {
        first: &'static str,
        second: &'static str,
    },

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub(crate) fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn domain(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Domain {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable category used in CLI trailers.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation { .. } => "validation",
            Error::Domain { .. } => "domain",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Parse { .. } => "parse",
        }
    }

    /// The input key (or location) the error refers to, if any.
    pub fn key(&self) -> Option<String> {
        match self {
            Error::Validation { key, .. } | Error::Domain { key, .. } => Some(key.clone()),
            Error::Parse { location, .. } => Some(location.clone()),
            Error::RankDeficient { first, second } => Some(format!("{first},{second}")),
            Error::NoConvergence { routine, .. } => Some((*routine).to_string()),
        }
    }

    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. })
    }
}
