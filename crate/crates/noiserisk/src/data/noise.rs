//! Symmetric label corruption with retained ground truth.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{LabeledDataset, SplitTag};
use crate::error::{Error, Result};

/// Flip probability and stream seed for one corruption pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Probability that each label is flipped, in [0, 1].
    pub rate: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rate) || !self.rate.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise rate {} outside [0, 1]",
                self.rate
            )));
        }
        Ok(())
    }
}

/// Independently flip each train label with probability `spec.rate`.
///
/// Samples are visited in storage order and consume exactly one uniform
/// variate each, so the realization depends only on (rate, seed, order).
/// The returned copy records the pre-flip labels and the flip mask.
pub fn inject_symmetric_noise(dataset: &LabeledDataset, spec: &NoiseSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    if dataset.split_tag != SplitTag::Train {
        return Err(Error::CleanSplitViolation(dataset.split_tag.to_string()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pre_flip = dataset.observed_labels.clone();
    let mut observed = pre_flip.clone();
    let mut flip_mask = vec![false; observed.len()];
    for i in 0..observed.len() {
        let u: f64 = rng.random();
        if u < spec.rate {
            observed[i] = 1 - observed[i];
            flip_mask[i] = true;
        }
    }

    LabeledDataset::new(
        dataset.features.clone(),
        observed,
        Some(pre_flip),
        Some(flip_mask),
        SplitTag::Train,
    )
}
