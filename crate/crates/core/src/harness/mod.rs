//! Configuration, the offline/online identification loop and experiment sweeps.

mod config;
mod experiment;
mod online;

pub use config::{DataSource, ExperimentConfig};
pub use experiment::{
    aggregate_csv, load_data, metrics_csv, run_experiment, run_experiment_on, run_trial, truth_residual, write_results,
    AggregateRow, ExperimentResult, TrialResult, METRICS_HEADER,
};
pub use online::{MetricsRow, OnlineIdentifier, OnlineSettings};
