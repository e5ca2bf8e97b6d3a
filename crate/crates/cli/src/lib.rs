//! Command-line front end: configuration parsing, amplitude sweeps, audits
//! and Monte-Carlo mutual information, all emitting CSV.

pub mod app;
pub mod audit;
pub mod config;
pub mod error;
pub mod mi;
pub mod sweep;

pub use error::{CliError, CliResult};
