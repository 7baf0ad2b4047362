//! Single runs, sweeps, and the persisted result record.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricsRecord;
use crate::nnet::MlpParams;

use super::config::{ExperimentConfig, Method};
use super::train::{ensemble_scores, prepare_data, scores_to_preds, train_model};

/// Bumped whenever the persisted record layout changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;

/// One epoch of the training trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochTrace {
    pub epoch: usize,
    /// Mean loss over the samples actually trained on (net A for
    /// two-network methods).
    pub train_loss: f64,
    /// Fraction of the training set the method kept this epoch; 1.0 when it
    /// trains on everything.
    pub selected_fraction: f64,
    /// Ensemble balanced accuracy on the validation split; absent when the
    /// split is empty or single-class.
    pub val_bac: Option<f64>,
    /// Fraction of selection decisions that match ground truth; absent
    /// without a flip mask or before selection starts.
    pub selection_agreement: Option<f64>,
}

/// Selection quality aggregated over the run, against the known flip mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStats {
    pub mean_agreement_post_warmup: Option<f64>,
    pub final_agreement: f64,
    /// Fraction of finally selected samples that are truly clean.
    pub final_precision: Option<f64>,
    /// Fraction of truly clean samples finally selected.
    pub final_recall: Option<f64>,
}

/// The complete, self-describing record of one run: the resolved config it
/// came from, the training trace, and test-set metrics. Failed runs carry
/// an `error` message and no metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub schema_version: u32,
    /// Content hash of the resolved config; the sort key for sweeps.
    pub fingerprint: String,
    /// Content hash of the data source; equal across cells that share data.
    pub data_fingerprint: String,
    pub method: Method,
    pub cost_sensitive: bool,
    pub noise_rate: f64,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub trace: Vec<EpochTrace>,
    pub metrics: Option<MetricsRecord>,
    /// True when the positive prediction rate on test is >= 0.9 in either
    /// direction.
    pub collapse: bool,
    pub wall_clock_secs: f64,
    pub selection_stats: Option<SelectionStats>,
    pub error: Option<String>,
}

impl RunResult {
    /// A record for a run that never got to training, for sweep isolation.
    pub fn failed(config: &ExperimentConfig, message: String) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            fingerprint: config.fingerprint(),
            data_fingerprint: config.data_fingerprint(),
            method: config.method,
            cost_sensitive: config.cost_sensitive,
            noise_rate: config.noise_rate,
            seed: config.seed,
            config: config.clone(),
            trace: Vec::new(),
            metrics: None,
            collapse: false,
            wall_clock_secs: 0.0,
            selection_stats: None,
            error: Some(message),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Execute one fully resolved experiment.
///
/// Precondition violations (bad config, missing files, single-class data)
/// come back as errors. Numeric failures mid-training come back as
/// `Ok(record)` with the `error` field set and the partial trace attached,
/// so a sweep can record them without dying.
pub fn run_single(config: &ExperimentConfig) -> Result<RunResult> {
    config.validate()?;
    if config.matrix.is_some() {
        return Err(Error::Config(
            "config has a [matrix] section; use run_matrix".into(),
        ));
    }
    let started = Instant::now();
    let prep = prepare_data(config)?;
    let outcome = train_model(config, &prep.train, &prep.val, prep.sigma_aug)?;

    let (metrics, collapse, error) = match outcome.failure {
        Some(message) => (None, false, Some(message)),
        None => {
            let (metrics, collapse) =
                evaluate(&outcome.nets, &prep.test.features, &prep.test.observed_labels, config)?;
            (Some(metrics), collapse, None)
        }
    };

    Ok(RunResult {
        schema_version: SCHEMA_VERSION,
        fingerprint: config.fingerprint(),
        data_fingerprint: config.data_fingerprint(),
        method: config.method,
        cost_sensitive: config.cost_sensitive,
        noise_rate: config.noise_rate,
        seed: config.seed,
        config: config.clone(),
        trace: outcome.trace,
        metrics,
        collapse,
        wall_clock_secs: started.elapsed().as_secs_f64(),
        selection_stats: outcome.selection_stats,
        error,
    })
}

fn evaluate(
    nets: &[MlpParams],
    features: &ndarray::Array2<f64>,
    labels: &[u8],
    config: &ExperimentConfig,
) -> Result<(MetricsRecord, bool)> {
    let scores = ensemble_scores(nets, features)?;
    let preds = scores_to_preds(&scores, config.decision_threshold);
    let metrics = MetricsRecord::compute(&preds, labels, &scores, &config.risk_scenarios)?;
    let collapse = metrics.is_collapsed();
    Ok((metrics, collapse))
}

/// Run the full Cartesian product of the config's `[matrix]` axes.
///
/// Every cell is isolated: a cell that fails for any reason becomes a
/// failure record and the sweep continues. Results come back sorted by
/// config fingerprint so the output is independent of scheduling, and
/// `parallelism` caps the worker threads (1 = sequential).
pub fn run_matrix(base: &ExperimentConfig, parallelism: usize) -> Result<Vec<RunResult>> {
    base.validate()?;
    let spec = base.matrix.as_ref().ok_or_else(|| {
        Error::Config("run_matrix needs a [matrix] section in the config".into())
    })?;
    if parallelism == 0 {
        return Err(Error::Config("parallelism must be >= 1".into()));
    }

    let mut cells = Vec::with_capacity(spec.n_cells());
    for &method in &spec.methods {
        for &cs in &spec.cost_sensitive {
            for &noise in &spec.noise_rates {
                for &seed in &spec.seeds {
                    cells.push(base.cell(method, cs, noise, seed));
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut results: Vec<RunResult> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| run_single(cell).unwrap_or_else(|e| RunResult::failed(cell, e.to_string())))
            .collect()
    });
    results.sort_by(|a, b| a.fingerprint.cmp(&b.fingerprint));
    Ok(results)
}
