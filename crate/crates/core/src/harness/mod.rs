//! Experiment orchestration: configuration, seeded ensembles, sweeps,
//! confidence intervals, reports and the command-line interface.

#[cfg(feature = "cli")]
pub mod cli;
pub mod config;
pub mod experiment;
pub mod report;
pub mod stats;
pub mod sweep;

pub use config::{ExperimentConfig, GridPoint, MethodConfig, MethodKind};
pub use experiment::{Member, TrainingContext};
pub use stats::{median, median_ci, MedianCi};
pub use sweep::{aggregate, run_sweep, select_parameters, PointSummary, RunRow, SweepResult};
