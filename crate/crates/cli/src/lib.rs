//! Configuration, orchestration and report emission behind the `leviflat` binary.

pub mod config;
pub mod report;
pub mod run;

pub use config::{load_config, parse_config, parse_resolution, ConfigError, RunConfig};
pub use report::{CheckOutcome, RunReport, Status, FAILED_MARKER, REPORT_FILE};
pub use run::{check_scenarios, dump_leaves, dump_levi, run_scenario};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
