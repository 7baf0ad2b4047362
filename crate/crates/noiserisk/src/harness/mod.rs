//! Experiment orchestration: configs, training runs, sweeps, persistence,
//! and reports.
//!
//! A TOML config resolves into an [`ExperimentConfig`]; [`run_single`]
//! executes it end to end (data, noise, training, evaluation) and
//! [`run_matrix`] runs the Cartesian product of the `[matrix]` axes with
//! per-cell failure isolation. Results persist as JSONL and feed the three
//! report emitters.

pub mod cli;
pub mod config;
pub mod persist;
pub mod report;
pub mod run;
pub mod train;

pub use config::{CsvDataConfig, DataConfig, ExperimentConfig, GmmConfig, MatrixSpec, Method};
pub use persist::{canonical_bytes, load_results, persist_results};
pub use report::{
    emit_method_table, emit_noise_impact_report, emit_tradeoff_data, NoiseImpactReport,
    TradeoffData,
};
pub use run::{run_matrix, run_single, EpochTrace, RunResult, SelectionStats, SCHEMA_VERSION};
pub use train::{prepare_data, train_model, PreparedData, TrainOutcome};
