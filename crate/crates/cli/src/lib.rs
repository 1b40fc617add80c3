//! Command-line front end: configuration parsing and run orchestration.

pub mod config;
pub mod format;
pub mod run;
