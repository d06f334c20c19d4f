//! Command-line laboratory for two-channel quantum teleportation: file formats, the `qtl`
//! subcommands and the invariant suites run by `qtl verify`.

pub mod cli;
pub mod error;
pub mod io;
pub mod verify;

pub use error::{exit, CliError, Result};
