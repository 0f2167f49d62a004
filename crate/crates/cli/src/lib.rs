//! Batch front end: reads measurement files, runs the bounds pipeline and writes reports.

pub mod error;
pub mod input;
pub mod pipeline;
pub mod report;

pub use error::{CliError, CliResult};
