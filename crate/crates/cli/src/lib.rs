//! Scenario runner: parameter sweeps, interferometer scans, single-state
//! reports and the pinned regression check, emitted as CSV or key-value text.

pub mod config;
pub mod error;
pub mod format;
pub mod grid;
pub mod paper_check;
pub mod scenarios;

pub use error::{CliError, Result};
