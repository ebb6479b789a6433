//! Scenario runner for the `eprsim` simulator.
//!
//! Commands validate the whole configuration, compute every output in memory and only
//! then write files, so a rejected configuration leaves the output directory untouched.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run_epr_spectrum, run_infer, run_phasematch, run_squeeze_spectrum, run_validate};
pub use error::{CliError, Result};
pub use output::{Report, Summary};
