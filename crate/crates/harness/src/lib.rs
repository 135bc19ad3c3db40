//! Experiment harness for the adaptive functional time series estimators:
//! declarative configs, a reproducible Monte Carlo engine, report emission
//! and CSV ingestion. The `ftsreg` binary exposes everything as subcommands.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod report;

pub use error::{HarnessError, Result};
