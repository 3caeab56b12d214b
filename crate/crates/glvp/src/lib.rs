//! File formats, reports and the command-line front end for `glvp-core`.

pub mod cli;
pub mod error;
pub mod format;
pub mod report;
pub mod suite;

pub use error::CliError;
