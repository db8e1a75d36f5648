//! Experiment tooling for the `dbtrain` simulator: flat `key = value`
//! configs, sweep suites, ordered CSV output and per-group summaries with
//! declarative checks. The `simulate` binary is a thin front end over this
//! library.

pub mod config;
pub mod error;
pub mod runner;
pub mod suite;
pub mod summary;
pub mod table;

pub use config::parse_config;
pub use error::{CliError, CliResult};
pub use runner::{run_suite, RunOptions, RunOutcome};
pub use suite::{ExpandOptions, ExperimentSuite};
pub use summary::{summarize_file, summarize_rows, SummaryReport};
pub use table::{CsvRow, HEADER};
