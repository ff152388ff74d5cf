//! Experiment driver: scenario layouts, seeded sweeps, slope fits and CSV/JSON output.

pub mod config;
pub mod error;
pub mod record;
pub mod scenario;
pub mod stats;
pub mod sweep;

pub use config::{ConfigFile, SweepConfig, SweepKind};
pub use error::{ExpError, Result};
pub use record::{emit_results, read_results, write_results, ExperimentRecord, Format, Status, CSV_COLUMNS};
pub use scenario::{generate_scenario, Scenario, ScenarioKind};
pub use stats::{loglog_points, loglog_slope, ols_slope};
pub use sweep::{run_esprit_sweep, run_rayleigh_sweep, run_sigma_sweep, run_sweep, trial_seed};
