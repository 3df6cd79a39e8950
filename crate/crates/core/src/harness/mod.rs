//! Configuration, output files, the command-line interface and the
//! validation suite.

pub mod cli;
pub mod config;
pub mod output;
pub mod validate;

pub use config::{ConfigError, ConfigLayer, OutputFormat, RunConfig};
pub use validate::{run_validate, CheckResult, Fixtures, ValidationReport};
