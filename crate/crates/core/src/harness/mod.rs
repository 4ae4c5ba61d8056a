//! Scenario configuration, the step driver and file output.

pub mod config;
pub mod driver;
pub mod output;

pub use config::ScenarioConfig;
pub use driver::{run_scenario, Mode, RunReport, Simulation};
