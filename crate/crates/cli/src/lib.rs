//! Library side of the `solgeo` command: every subcommand is a plain
//! function here so that tests can drive it in-process.

pub mod cli;
pub mod error;
pub mod ops;
pub mod sweep;

pub use cli::{run, Cli};
pub use error::{CliError, Result};
