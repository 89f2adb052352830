//! Scenario configuration, the model catalog, seeded fuzzing and report
//! emission for the `heatlab` audits.

pub mod catalog;
pub mod config;
pub mod error;
pub mod fuzz;
pub mod report;
pub mod scenario;

pub use config::ScenarioConfig;
pub use error::{RunError, RunResult};
pub use report::ReportFile;
pub use scenario::{run_scenario, ReportBundle};

/// Process exit codes.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const AUDIT_FAILURE: u8 = 1;
    pub const CONFIG_ERROR: u8 = 2;
}
