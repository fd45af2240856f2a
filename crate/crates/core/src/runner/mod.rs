pub mod config;
pub mod fit;
pub mod output;
mod report;
mod run;

pub use config::{parse_config, parse_config_with_overrides, ConfigErrors, ConfigViolation, ExperimentConfig, ExperimentKind};
pub use report::{RateReport, ReportPoint};
pub use run::{initial_field, run, sweep, Artifacts};
