//! Configuration parsing and subcommands behind the `pftg` binary.

pub mod commands;
pub mod config;

pub use commands::{cmd_check, cmd_diag, cmd_run, cmd_sweep, CliError};
pub use config::{ConfigError, RunConfig};
