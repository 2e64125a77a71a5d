//! Scenario runner for the phonon blockade toolkit: configuration files,
//! reproduction scenarios, CSV artifacts and verdict reports.

pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod scenarios;

pub use config::{Scenario, ScenarioConfig};
pub use error::{CliError, CliResult};
pub use report::{Check, VerdictReport};
pub use scenarios::run_scenario;
