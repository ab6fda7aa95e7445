//! Training loop, evaluation metrics and multi-seed comparisons.

mod compare;
mod config;
mod io;
mod metrics;
mod train;

pub use compare::{compare, ComparisonSummary, MethodSummary, RunEntry};
pub use config::{
    DataSource, GraphSource, HamiltonianSource, RunConfig, TaskKind, TaskSpec, DEFAULT_NOISE_PROB, DEFAULT_SHOTS,
};
pub use io::{
    load_records_csv, read_records_csv, save_json, save_records_csv, write_records_csv, RunSummary, CSV_HEADER,
};
pub use metrics::{
    convergence_rate, default_cr_window, median, objective_for, shot_accounting, shot_accounting_for, speedup, Series,
    ShotTotals, Speedup,
};
pub use train::{train, RunRecord, RunResult, PREDICTION_SCHEDULE};
