//! Imbalanced binary datasets: synthetic generation, CSV ingestion with
//! label binarization, and seeded symmetric label-noise injection.
//!
//! Ground truth is retained through corruption (`true_labels`, `flip_mask`)
//! so selection mechanisms can be scored against the real flips downstream.

mod csv_io;
mod noise;
mod synthetic;

pub use csv_io::{dump_csv, ingest_csv, BinarizationMap};
pub use noise::{inject_symmetric_noise, NoiseSpec};
pub use synthetic::{generate_synthetic, OverlapMode, SyntheticSpec};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which split a dataset belongs to. Only the train split may be corrupted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

impl std::fmt::Display for SplitTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SplitTag::Train => write!(f, "train"),
            SplitTag::Val => write!(f, "val"),
            SplitTag::Test => write!(f, "test"),
        }
    }
}

/// Feature matrix plus observed labels, with optional hidden ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    /// One row per sample.
    pub features: Array2<f64>,
    /// 0 = benign/negative, 1 = malignant/positive.
    pub observed_labels: Vec<u8>,
    /// Pre-corruption labels; present iff noise was injected or the data is
    /// synthetic (true by construction).
    pub true_labels: Option<Vec<u8>>,
    /// Marks corrupted samples; `flip_mask[i] == (observed != true)`.
    pub flip_mask: Option<Vec<bool>>,
    pub split_tag: SplitTag,
}

impl LabeledDataset {
    /// Build a dataset, enforcing the structural invariants.
    pub fn new(
        features: Array2<f64>,
        observed_labels: Vec<u8>,
        true_labels: Option<Vec<u8>>,
        flip_mask: Option<Vec<bool>>,
        split_tag: SplitTag,
    ) -> Result<Self> {
        let n = features.nrows();
        if observed_labels.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} feature rows vs {} labels",
                n,
                observed_labels.len()
            )));
        }
        if observed_labels.iter().any(|&y| y > 1) {
            return Err(Error::InvalidParameter("labels must be 0 or 1".into()));
        }
        if let Some(t) = &true_labels {
            if t.len() != n {
                return Err(Error::ShapeMismatch("true_labels length".into()));
            }
            if t.iter().any(|&y| y > 1) {
                return Err(Error::InvalidParameter("true labels must be 0 or 1".into()));
            }
        }
        if let Some(m) = &flip_mask {
            if m.len() != n {
                return Err(Error::ShapeMismatch("flip_mask length".into()));
            }
            match &true_labels {
                Some(t) => {
                    for i in 0..n {
                        if m[i] != (observed_labels[i] != t[i]) {
                            return Err(Error::InvalidParameter(format!(
                                "flip_mask inconsistent with labels at row {i}"
                            )));
                        }
                    }
                }
                None => {
                    return Err(Error::InvalidParameter(
                        "flip_mask requires true_labels".into(),
                    ))
                }
            }
            if split_tag != SplitTag::Train && m.iter().any(|&f| f) {
                return Err(Error::CleanSplitViolation(split_tag.to_string()));
            }
        }
        Ok(Self {
            features,
            observed_labels,
            true_labels,
            flip_mask,
            split_tag,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.observed_labels.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    /// Fraction of observed labels equal to 1.
    pub fn prevalence(&self) -> f64 {
        if self.observed_labels.is_empty() {
            return 0.0;
        }
        self.observed_labels.iter().filter(|&&y| y == 1).count() as f64
            / self.observed_labels.len() as f64
    }

    /// True iff both observed classes are present.
    pub fn has_both_classes(&self) -> bool {
        let pos = self.observed_labels.iter().filter(|&&y| y == 1).count();
        pos > 0 && pos < self.observed_labels.len()
    }

    /// Per-dimension standard deviation of the features (population form).
    pub fn feature_std(&self) -> Vec<f64> {
        let n = self.features.nrows().max(1) as f64;
        (0..self.features.ncols())
            .map(|j| {
                let col = self.features.column(j);
                let mean = col.sum() / n;
                let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                var.sqrt()
            })
            .collect()
    }
}
