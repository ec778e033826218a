//! Experiment harness for `cleanup-core`: configuration files, seed sweeps,
//! CSV results, replay files and Q-table snapshots.

pub mod error;
pub mod replay;
pub mod runner;
pub mod snapshot;
pub mod spec;

pub use error::{HarnessError, Result};
pub use runner::{run_experiment, ExperimentSummary, ResultRow, RESULTS_HEADER};
pub use spec::{parse_config, ExperimentSpec, PolicyKind};
