//! Batch driver for the `nilpw-core` transforms: configuration, resumable
//! lambda slots, CSV reports and the acceptance checks.

pub mod checks;
pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod slots;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use run::{execute, Command, Outcome, RunOptions};
