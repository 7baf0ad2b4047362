//! Declarative experiment configuration.
//!
//! Configs are TOML files with a documented key set; unknown keys are hard
//! errors so a typo in a method name can never silently change what gets
//! compared. Every omitted key falls back to a recorded default, and the
//! fully resolved config is what gets fingerprinted and persisted.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{BinarizationMap, SyntheticSpec};
use crate::error::{Error, Result};
use crate::metrics::RiskScenario;
use crate::nnet::CostWeights;
use crate::selection::GmmOptions;
use crate::semisup::SemiConfig;

/// Training strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Plain minibatch training, no noise handling.
    Baseline,
    /// Single network; after warmup, each epoch trains only on samples the
    /// loss-mixture model marks clean.
    GmmFilter,
    /// Two networks; each trains on the small-loss samples its peer selects.
    CoTeaching,
    /// Two networks; the peer's loss mixture divides data into a labeled
    /// (refined) and unlabeled (guessed) set trained with mixup.
    Dividemix,
    /// Dividemix flow with class-uniform selection of the labeled set.
    Unicon,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Baseline,
        Method::GmmFilter,
        Method::CoTeaching,
        Method::Dividemix,
        Method::Unicon,
    ];

    /// Methods that model the loss distribution need warmup epochs first.
    pub fn requires_warmup(self) -> bool {
        matches!(self, Method::GmmFilter | Method::Dividemix | Method::Unicon)
    }

    pub fn two_networks(self) -> bool {
        matches!(self, Method::CoTeaching | Method::Dividemix | Method::Unicon)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::GmmFilter => "gmm_filter",
            Method::CoTeaching => "co_teaching",
            Method::Dividemix => "dividemix",
            Method::Unicon => "unicon",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method {s:?}; expected one of baseline, gmm_filter, \
                     co_teaching, dividemix, unicon"
                ))
            })
    }
}

/// Where the train/val/test triple comes from: exactly one of `synthetic`
/// or `csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<CsvDataConfig>,
}

impl DataConfig {
    pub fn synthetic(spec: SyntheticSpec) -> Self {
        Self {
            synthetic: Some(spec),
            csv: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.synthetic, &self.csv) {
            (Some(spec), None) => spec.validate(),
            (None, Some(csv)) => csv.validate(),
            (Some(_), Some(_)) => Err(Error::Config(
                "specify either [data.synthetic] or [data.csv], not both".into(),
            )),
            (None, None) => Err(Error::Config(
                "missing data source: add a [data.synthetic] or [data.csv] section".into(),
            )),
        }
    }
}

/// CSV-backed data source. Files must carry a header row; an optional
/// `true_label` column supplies ground truth for selection-quality stats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvDataConfig {
    pub train: PathBuf,
    pub val: PathBuf,
    pub test: PathBuf,
    #[serde(default = "default_label_column")]
    pub label_column: String,
    /// Optional mapping from raw class strings to 0/1; without it labels
    /// must already be numeric 0/1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binarization: Option<BinarizationMap>,
}

impl CsvDataConfig {
    pub fn validate(&self) -> Result<()> {
        if self.label_column.trim().is_empty() {
            return Err(Error::Config("label_column must be non-empty".into()));
        }
        Ok(())
    }
}

fn default_label_column() -> String {
    "label".into()
}

/// Loss-mixture fitting and thresholding knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GmmConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub var_floor: f64,
    /// Clean-posterior threshold used by the gmm_filter and dividemix masks.
    pub threshold: f64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        let opts = GmmOptions::default();
        Self {
            tol: opts.tol,
            max_iter: opts.max_iter,
            var_floor: opts.var_floor,
            threshold: 0.5,
        }
    }
}

impl GmmConfig {
    pub fn options(&self) -> GmmOptions {
        GmmOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            var_floor: self.var_floor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.options().validate()?;
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!(
                "gmm.threshold {} outside (0, 1)",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Axes of a sweep: the Cartesian product of methods, cost-sensitivity
/// settings, noise rates, and seeds. Cells at the same (noise, seed) share
/// their data and noise realization so method comparisons are paired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub methods: Vec<Method>,
    #[serde(default = "default_cs_axis")]
    pub cost_sensitive: Vec<bool>,
    pub noise_rates: Vec<f64>,
    pub seeds: Vec<u64>,
}

fn default_cs_axis() -> Vec<bool> {
    vec![false]
}

impl MatrixSpec {
    pub fn n_cells(&self) -> usize {
        self.methods.len() * self.cost_sensitive.len() * self.noise_rates.len() * self.seeds.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty()
            || self.cost_sensitive.is_empty()
            || self.noise_rates.is_empty()
            || self.seeds.is_empty()
        {
            return Err(Error::Config("matrix axes must be non-empty".into()));
        }
        Ok(())
    }
}

/// One fully resolved experiment. See the crate README for the key-by-key
/// TOML documentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    pub data: DataConfig,
    #[serde(default)]
    pub cost_sensitive: bool,
    #[serde(default)]
    pub seed: u64,
    /// Symmetric flip probability applied to the train split.
    #[serde(default)]
    pub noise_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    /// Epochs of plain cross-entropy on all samples before any selection or
    /// cost weighting kicks in.
    #[serde(default = "default_warmup")]
    pub warmup_epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub base_lr: f64,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    /// Hidden layer widths; empty means a linear model.
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "default_threshold")]
    pub decision_threshold: f64,
    /// Epochs over which the co-teaching keep fraction ramps down to
    /// 1 - noise_rate.
    #[serde(default = "default_forget_ramp")]
    pub forget_ramp_epochs: usize,
    #[serde(default)]
    pub weights: CostWeights,
    #[serde(default)]
    pub gmm: GmmConfig,
    #[serde(default)]
    pub semi: SemiConfig,
    #[serde(default = "default_scenarios")]
    pub risk_scenarios: Vec<RiskScenario>,
    /// Present only in matrix configs; stripped from per-cell configs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
}

fn default_epochs() -> usize {
    60
}
fn default_warmup() -> usize {
    10
}
fn default_batch() -> usize {
    64
}
fn default_lr() -> f64 {
    0.01
}
fn default_momentum() -> f64 {
    0.9
}
fn default_hidden() -> Vec<usize> {
    vec![64, 64]
}
fn default_threshold() -> f64 {
    0.5
}
fn default_forget_ramp() -> usize {
    10
}
fn default_scenarios() -> Vec<RiskScenario> {
    vec![RiskScenario::risk_i(), RiskScenario::risk_ii()]
}

impl ExperimentConfig {
    /// Minimal valid config for the given method on synthetic data.
    pub fn synthetic_default(method: Method) -> Self {
        Self {
            method,
            data: DataConfig::synthetic(SyntheticSpec::default()),
            cost_sensitive: false,
            seed: 0,
            noise_rate: 0.0,
            epochs: default_epochs(),
            warmup_epochs: default_warmup(),
            batch_size: default_batch(),
            base_lr: default_lr(),
            momentum: default_momentum(),
            hidden: default_hidden(),
            decision_threshold: default_threshold(),
            forget_ramp_epochs: default_forget_ramp(),
            weights: CostWeights::default(),
            gmm: GmmConfig::default(),
            semi: SemiConfig::default(),
            risk_scenarios: default_scenarios(),
            matrix: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.data.validate()?;
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::Config(format!(
                "noise_rate {} outside [0, 1]",
                self.noise_rate
            )));
        }
        if self.method == Method::CoTeaching && self.noise_rate >= 1.0 {
            return Err(Error::Config(
                "co_teaching requires noise_rate < 1 (keep fraction would reach zero)".into(),
            ));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.warmup_epochs > self.epochs {
            return Err(Error::Config(format!(
                "warmup_epochs {} exceeds epochs {}",
                self.warmup_epochs, self.epochs
            )));
        }
        if self.method.requires_warmup() && self.warmup_epochs == 0 {
            return Err(Error::Config(format!(
                "method {} needs warmup_epochs >= 1 to form a loss distribution",
                self.method
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if !(self.base_lr > 0.0) || !self.base_lr.is_finite() {
            return Err(Error::Config(format!(
                "base_lr must be finite and > 0, got {}",
                self.base_lr
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum {} outside [0, 1)",
                self.momentum
            )));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Config("hidden widths must be > 0".into()));
        }
        if !(self.decision_threshold > 0.0 && self.decision_threshold < 1.0) {
            return Err(Error::Config(format!(
                "decision_threshold {} outside (0, 1)",
                self.decision_threshold
            )));
        }
        if self.forget_ramp_epochs == 0 {
            return Err(Error::Config("forget_ramp_epochs must be >= 1".into()));
        }
        self.weights
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.gmm.validate()?;
        self.semi
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.risk_scenarios.is_empty() {
            return Err(Error::Config("risk_scenarios must be non-empty".into()));
        }
        let mut names: Vec<&str> = self.risk_scenarios.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.risk_scenarios.len() {
            return Err(Error::Config("risk scenario names must be unique".into()));
        }
        for s in &self.risk_scenarios {
            RiskScenario::new(s.name.clone(), s.c_fn, s.c_fp)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        // Matrix axis values are deliberately not range-checked here: an
        // invalid cell must surface as one failure record in the sweep, not
        // abort the whole sweep upfront.
        if let Some(matrix) = &self.matrix {
            matrix.validate()?;
        }
        Ok(())
    }

    /// Content hash of the resolved config (matrix section excluded), hex
    /// encoded. Stable under TOML key reordering because hashing happens
    /// after deserialization.
    pub fn fingerprint(&self) -> String {
        let mut canonical = self.clone();
        canonical.matrix = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Content hash of the data source alone; shared by every cell of a
    /// matrix over one dataset.
    pub fn data_fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(&self.data).expect("data config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// The per-cell config for one matrix cell.
    pub fn cell(&self, method: Method, cost_sensitive: bool, noise_rate: f64, seed: u64) -> Self {
        let mut cell = self.clone();
        cell.method = method;
        cell.cost_sensitive = cost_sensitive;
        cell.noise_rate = noise_rate;
        cell.seed = seed;
        cell.matrix = None;
        cell
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        method = "baseline"
        [data.synthetic]
    "#;

    #[test]
    fn minimal_config_resolves_defaults() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.method, Method::Baseline);
        assert_eq!(cfg.epochs, 60);
        assert_eq!(cfg.warmup_epochs, 10);
        assert_eq!(cfg.batch_size, 64);
        assert_eq!(cfg.base_lr, 0.01);
        assert_eq!(cfg.momentum, 0.9);
        assert_eq!(cfg.hidden, vec![64, 64]);
        assert_eq!(cfg.weights.w1, 20.0);
        assert_eq!(cfg.risk_scenarios.len(), 2);
        assert_eq!(cfg.data.synthetic.unwrap().n_train, 2000);
    }

    #[test]
    fn unknown_key_is_a_hard_error() {
        let text = r#"
            method = "baseline"
            epochz = 10
            [data.synthetic]
        "#;
        let err = ExperimentConfig::from_toml_str(text).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert!(err.to_string().contains("epochz"));
    }

    #[test]
    fn unknown_nested_key_is_a_hard_error() {
        let text = r#"
            method = "baseline"
            [data.synthetic]
            n_trian = 500
        "#;
        assert!(ExperimentConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn unknown_method_is_a_hard_error() {
        let text = r#"
            method = "gmm_fliter"
            [data.synthetic]
        "#;
        assert!(ExperimentConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn warmup_rules() {
        let mut cfg = ExperimentConfig::synthetic_default(Method::GmmFilter);
        cfg.warmup_epochs = 0;
        assert!(cfg.validate().is_err());
        cfg.warmup_epochs = 10;
        assert!(cfg.validate().is_ok());
        cfg.warmup_epochs = 100;
        assert!(cfg.validate().is_err());

        let mut baseline = ExperimentConfig::synthetic_default(Method::Baseline);
        baseline.warmup_epochs = 0;
        assert!(baseline.validate().is_ok());
    }

    #[test]
    fn data_source_must_be_exactly_one() {
        let both = DataConfig {
            synthetic: Some(SyntheticSpec::default()),
            csv: Some(CsvDataConfig {
                train: "a.csv".into(),
                val: "b.csv".into(),
                test: "c.csv".into(),
                label_column: "label".into(),
                binarization: None,
            }),
        };
        assert!(both.validate().is_err());
        let neither = DataConfig {
            synthetic: None,
            csv: None,
        };
        assert!(neither.validate().is_err());
    }

    #[test]
    fn fingerprint_stable_under_key_reordering() {
        let a = ExperimentConfig::from_toml_str(
            r#"
            method = "baseline"
            epochs = 30
            seed = 5
            [data.synthetic]
            n_train = 400
        "#,
        )
        .unwrap();
        let b = ExperimentConfig::from_toml_str(
            r#"
            seed = 5
            epochs = 30
            method = "baseline"
            [data.synthetic]
            n_train = 400
        "#,
        )
        .unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn fingerprint_ignores_matrix_but_tracks_cells() {
        let mut cfg = ExperimentConfig::synthetic_default(Method::Baseline);
        let plain = cfg.fingerprint();
        cfg.matrix = Some(MatrixSpec {
            methods: vec![Method::Baseline],
            cost_sensitive: vec![false],
            noise_rates: vec![0.0],
            seeds: vec![1],
        });
        assert_eq!(cfg.fingerprint(), plain);

        let cell_a = cfg.cell(Method::Baseline, false, 0.2, 1);
        let cell_b = cfg.cell(Method::Baseline, false, 0.2, 2);
        assert_ne!(cell_a.fingerprint(), cell_b.fingerprint());
        assert_eq!(cell_a.data_fingerprint(), cell_b.data_fingerprint());
    }

    #[test]
    fn method_round_trips_through_strings() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("resnet".parse::<Method>().is_err());
    }

    #[test]
    fn co_teaching_noise_domain() {
        let mut cfg = ExperimentConfig::synthetic_default(Method::CoTeaching);
        cfg.noise_rate = 1.0;
        assert!(cfg.validate().is_err());
        cfg.noise_rate = 0.4;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn scenario_names_must_be_unique() {
        let mut cfg = ExperimentConfig::synthetic_default(Method::Baseline);
        cfg.risk_scenarios = vec![RiskScenario::risk_i(), RiskScenario::risk_i()];
        assert!(cfg.validate().is_err());
    }
}
