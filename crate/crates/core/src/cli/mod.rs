//! Scenario harness: JSON configs in, CSV/JSON artifacts and a run manifest out.

pub mod emit;
pub mod run;
pub mod scenario;

pub use emit::{emit_results, Format, Record};
pub use run::{load_scenario, run_scenario, RunError, RunOptions, RunOutcome};
pub use scenario::{parse_scenario, Kind, Scenario, ScenarioError};
