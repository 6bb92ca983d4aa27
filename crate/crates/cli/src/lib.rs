//! Configuration, orchestration and file output for the `msdiff` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{load_config, parse_config, SimConfig};
pub use error::{CliError, Result};
