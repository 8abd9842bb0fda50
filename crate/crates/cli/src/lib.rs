//! File formats and subcommands behind the `nassign` binary.

pub mod commands;
pub mod error;
pub mod fixtures;
pub mod format;

pub use error::{CliError, CliResult};
