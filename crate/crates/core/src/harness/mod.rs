//! Experiment configuration, seeded simulation, and output files.

pub mod config;
pub mod output;
pub mod runner;
pub mod seed;

pub use config::{ExperimentConfig, TruthSource};
pub use output::{
    aggregate_records, emit_plot_data, plot_data, read_csv, read_csv_file, render_svg, write_csv,
    write_csv_file, CSV_HEADER,
};
pub use runner::{
    threads_from_env, AggregateCurves, Experiment, ExperimentResult, PolicyRun, ReplicationOutput,
    RoundRecord, THREADS_ENV,
};
pub use seed::derive_seed;
