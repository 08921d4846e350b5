//! Command-line front end: sampling dumps, estimates, density tables,
//! ternary histograms and the acceptance battery.

pub mod battery;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{Cli, RunConfig};
pub use error::{CliError, CliResult};
