//! Experiment orchestration for hyperstat: JSON-configured sweeps over
//! iteration counts and seeds, rate fitting, and flat-file artifacts.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod measure;
pub mod pool;

pub use artifacts::{emit_artifacts, Artifact};
pub use config::{ExperimentConfig, Measurement, ScheduleOverrides};
pub use error::{HarnessError, Result};
pub use experiment::{load_report, run_experiment, run_experiment_with, RatePoint, RateReport, RunSummary};
pub use fit::fit_rate;
pub use measure::{measure_at, smoothing_delta, MeasureSettings};
