//! Experiment orchestration: JSON configuration, sweeps over horizon and
//! seed, log-log rate fitting, CSV export, and the CLI entry point.

mod cli;
mod config;
mod experiment;

pub use cli::{cli, EXIT_BOUND_FAILURE, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME};
pub use config::{
    ConfigError, ExperimentConfig, LossConfig, ProblemConfig, ResolvedConfig, ScheduleConfig,
};
pub use experiment::{
    derive_seed, fit_rate, pairwise_sum, run_experiment, AggregateRow, BoundRow, CellRow,
    ExperimentResult, FitError, RateFit, SlopeRow,
};
