use thiserror::Error;

/// Failure categories raised by the solvers and their setup.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular system: pivot {pivot} below tolerance")]
    Singular { pivot: usize },

    #[error("singular flux system at half-node {half_node} (t = {time}): pivot {pivot}")]
    SingularFlux { half_node: usize, time: f64, pivot: usize },

    #[error("singular deviator system at node {node} (t = {time}): pivot {pivot}")]
    SingularDeviator { node: usize, time: f64, pivot: usize },

    #[error("negative density {value:e} for species {species} at node {node} (t = {time})")]
    Positivity { time: f64, node: usize, species: usize, value: f64 },

    #[error("comparison error: {0}")]
    Comparison(String),

    #[error("empty snapshot history")]
    EmptyHistory,
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field: field.into(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
