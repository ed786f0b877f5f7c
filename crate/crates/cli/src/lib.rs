//! Experiment runner for the architecture search: configuration, seeded
//! grids of runs, the Clifford+T target set on disk, and report tables.

pub mod app;
pub mod config;
pub mod dataset;
pub mod error;
pub mod problem;
pub mod report;
pub mod runner;

pub use error::{CliError, Result};
