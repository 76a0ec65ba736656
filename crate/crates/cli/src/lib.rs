//! Command-line driver for the `arczero` library: configuration, coefficient
//! family files, and JSON/CSV reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod family;
pub mod report;

pub use commands::run;
pub use config::{Command, FamilySource, RunConfig, OUT_DIR_ENV};
pub use error::{CliError, CliResult};
pub use family::{load_family, parse_family};
pub use report::Report;
