//! One error class per diagnostic line and exit code.

use crate::movielens::ParseError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] ParseError),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("{0}")]
    Run(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io(_) => 3,
            Error::Parse(_) => 4,
            Error::Divergence(_) => 5,
            Error::Run(_) => 1,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn run(msg: impl Into<String>) -> Self {
        Error::Run(msg.into())
    }
}

impl From<fairrec_core::pmf::PmfError> for Error {
    fn from(e: fairrec_core::pmf::PmfError) -> Self {
        match e {
            fairrec_core::pmf::PmfError::Diverged { .. } => Error::Divergence(e.to_string()),
            other => Error::Run(other.to_string()),
        }
    }
}

impl From<fairrec_core::mln::MlnError> for Error {
    fn from(e: fairrec_core::mln::MlnError) -> Self {
        match e {
            fairrec_core::mln::MlnError::Diverged { .. } => Error::Divergence(e.to_string()),
            other => Error::Run(other.to_string()),
        }
    }
}

impl From<fairrec_core::minority::MinorityError> for Error {
    fn from(e: fairrec_core::minority::MinorityError) -> Self {
        Error::Run(e.to_string())
    }
}

impl From<fairrec_core::split::SplitError> for Error {
    fn from(e: fairrec_core::split::SplitError) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<fairrec_core::evaluate::EvaluateError> for Error {
    fn from(e: fairrec_core::evaluate::EvaluateError) -> Self {
        Error::Run(e.to_string())
    }
}

impl From<fairrec_core::heuristic::HeuristicError> for Error {
    fn from(e: fairrec_core::heuristic::HeuristicError) -> Self {
        Error::Run(e.to_string())
    }
}

impl From<fairrec_core::recommend::RecommendError> for Error {
    fn from(e: fairrec_core::recommend::RecommendError) -> Self {
        Error::Run(e.to_string())
    }
}

impl From<fairrec_core::ratings::RatingError> for Error {
    fn from(e: fairrec_core::ratings::RatingError) -> Self {
        Error::Run(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
