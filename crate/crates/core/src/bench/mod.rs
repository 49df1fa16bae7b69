//! Monte Carlo harness: configuration, metrics, sweeps and CSV output.

pub mod config;
pub mod csv;
pub mod experiment;
pub mod metrics;

pub use config::{load_config, parse_config, ExperimentConfig, Method};
pub use csv::{emit_csv, format_csv, format_g, parse_csv, read_csv, write_matrix};
pub use experiment::{
    bound_curve, dump_single, run_experiment, run_experiment_with_threads, trial_channel, trial_observation,
    BoundKind, SingleRun,
};
pub use metrics::{
    angle_errors_deg, doa_metrics, match_paths, nmse_db, nmse_ratio, ratio_to_db, MetricRecord, Pairing,
    NEG_INF_DB,
};
