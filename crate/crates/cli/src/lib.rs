//! Command-line front end: reads a JSON run configuration, runs the spectral
//! pipeline and writes the report and CSV tables.

pub mod config;
pub mod output;
pub mod runner;

pub use runner::{run, RunError, RunOptions, RunSummary};
