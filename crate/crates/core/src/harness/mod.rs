//! Seeded, replicated experiments: configuration, the replicate runner,
//! metrics and their CSV and JSON artifacts.

mod config;
mod metrics;
mod output;
mod run;
mod stats;

pub use config::{ExperimentConfig, Profile, CUTOFF_FRACTION, DOMAINS, PLANNERS};
pub use metrics::{aggregate, MetricsSummary, RunMetrics};
pub use output::{
    emit_csv, emit_plot_data, emit_summary_csv, read_csv, write_outputs, RECORD_COLUMNS,
};
pub use run::{
    mean_action_values, run_experiment, ExperimentOutput, ReplicateFailure, RunRecord, WorldLog,
};
pub use stats::{mean_stderr, paired_t_test, PairedTest};
