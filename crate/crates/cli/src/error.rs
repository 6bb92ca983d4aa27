use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("config error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("CFL number {number:.6} exceeds the stability limit {limit}")]
    StrictCfl { number: f64, limit: f64 },
    #[error(transparent)]
    Solver(#[from] msdiff::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit status for this failure category.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io { .. } => 1,
            Self::Parse { .. } | Self::Invalid(_) => 2,
            Self::Solver(msdiff::Error::Positivity { .. }) => 4,
            Self::Solver(msdiff::Error::InvalidParameter { .. } | msdiff::Error::Config(_)) => 2,
            Self::Solver(_) => 3,
            Self::StrictCfl { .. } => 5,
        }
    }
}
