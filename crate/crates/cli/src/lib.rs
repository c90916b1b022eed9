//! Scenario files, report rendering and the `cityfreight` command line.

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;

pub use commands::{run, write_output, Cli, Command};
pub use error::{CliError, ErrorClass, Result};
pub use report::{render, Format, Render};
pub use scenario::{emit_scenario, load_scenario, parse_scenario, resolve_scenario, Scenario};
