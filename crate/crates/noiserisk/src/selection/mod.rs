//! Clean-sample selection mechanisms.
//!
//! Three selectors share this module: posterior filtering with a
//! two-component 1-D Gaussian mixture fitted to per-sample losses,
//! small-loss ranking with a forget-rate schedule (co-teaching), and
//! class-uniform posterior-ranked selection. All selectors are pure
//! functions of their inputs.

mod gmm;

pub use gmm::{clean_posterior, fit_gmm_em, Gmm1d, GmmOptions};

use crate::error::{Error, Result};

/// Per-sample losses observed at one epoch.
#[derive(Debug, Clone)]
pub struct LossTrace {
    pub losses: Vec<f64>,
    pub epoch: usize,
}

impl LossTrace {
    pub fn new(losses: Vec<f64>, epoch: usize) -> Result<Self> {
        if losses.is_empty() {
            return Err(Error::InvalidParameter("empty loss trace".into()));
        }
        if losses.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidParameter(
                "losses must be finite and non-negative".into(),
            ));
        }
        Ok(Self { losses, epoch })
    }
}

/// Boolean selection over the train set plus the posterior that produced it.
#[derive(Debug, Clone)]
pub struct SelectionMask {
    pub selected: Vec<bool>,
    pub clean_posterior: Vec<f64>,
}

impl SelectionMask {
    /// Mask that keeps every sample (degenerate-fit fallback).
    pub fn select_all(n: usize) -> Self {
        Self {
            selected: vec![true; n],
            clean_posterior: vec![1.0; n],
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        self.selected
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
            .collect()
    }

    pub fn n_selected(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }
}

/// Min-max normalize losses to [0, 1]; applied before each GMM fit so the
/// variance floor is meaningful across epochs.
pub fn normalize_losses(losses: &[f64]) -> Result<Vec<f64>> {
    if losses.is_empty() {
        return Err(Error::InvalidParameter("empty loss vector".into()));
    }
    let min = losses.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !min.is_finite() || !max.is_finite() {
        return Err(Error::InvalidParameter("non-finite loss".into()));
    }
    if max == min {
        return Err(Error::DegenerateLosses);
    }
    let span = max - min;
    Ok(losses.iter().map(|l| (l - min) / span).collect())
}

/// Threshold the clean posterior of each loss at `tau`.
pub fn gmm_select(losses: &[f64], gmm: &Gmm1d, tau: f64) -> Result<SelectionMask> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold {tau} outside (0, 1)"
        )));
    }
    let clean_posterior: Vec<f64> = losses.iter().map(|&l| clean_posterior(l, gmm)).collect();
    let selected = clean_posterior.iter().map(|&w| w >= tau).collect();
    Ok(SelectionMask {
        selected,
        clean_posterior,
    })
}

/// Indices of the `ceil(keep_fraction * n)` smallest losses, ties broken by
/// lower index. Returned sorted ascending.
pub fn small_loss_select(losses: &[f64], keep_fraction: f64) -> Result<Vec<usize>> {
    if losses.is_empty() {
        return Err(Error::InvalidParameter("empty loss vector".into()));
    }
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "keep_fraction {keep_fraction} outside (0, 1]"
        )));
    }
    let n = losses.len();
    let k = ((keep_fraction * n as f64).ceil() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        losses[a]
            .partial_cmp(&losses[b])
            .expect("losses are finite")
            .then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = order.into_iter().take(k).collect();
    kept.sort_unstable();
    Ok(kept)
}

/// Co-teaching keep fraction: `1 - eta * min(epoch / ramp_epochs, 1)`.
/// Starts at 1, ramps down linearly, plateaus at `1 - eta`.
pub fn forget_rate(epoch: usize, eta: f64, ramp_epochs: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!(
            "noise rate {eta} outside [0, 1)"
        )));
    }
    if ramp_epochs == 0 {
        return Err(Error::InvalidParameter("ramp_epochs must be >= 1".into()));
    }
    let progress = (epoch as f64 / ramp_epochs as f64).min(1.0);
    Ok(1.0 - eta * progress)
}

/// Per-class outcome of a uniform selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformStats {
    /// Target picks per class: `floor(overall_budget * n / 2)`.
    pub per_class_budget: usize,
    /// Actually selected per class (index = observed label).
    pub taken: [usize; 2],
    /// True when a class had fewer members than the budget.
    pub capped: [bool; 2],
}

/// Class-uniform selection: within each observed class, keep the
/// `per_class_budget` samples with the highest clean posterior (capped at
/// class size). Keeps the minority class from being filtered away.
pub fn uniform_class_select(
    clean_posterior: &[f64],
    observed_labels: &[u8],
    overall_budget: f64,
) -> Result<(SelectionMask, UniformStats)> {
    if clean_posterior.len() != observed_labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} posteriors vs {} labels",
            clean_posterior.len(),
            observed_labels.len()
        )));
    }
    if !(overall_budget > 0.0 && overall_budget <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "overall_budget {overall_budget} outside (0, 1]"
        )));
    }
    if clean_posterior.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(Error::InvalidParameter(
            "posteriors must lie in [0, 1]".into(),
        ));
    }
    if observed_labels.iter().any(|&y| y > 1) {
        return Err(Error::InvalidParameter("labels must be binary".into()));
    }
    if !observed_labels.contains(&0) || !observed_labels.contains(&1) {
        return Err(Error::SingleClass);
    }

    let n = observed_labels.len();
    let budget = (overall_budget * n as f64 / 2.0).floor() as usize;
    let mut selected = vec![false; n];
    let mut taken = [0usize; 2];
    let mut capped = [false; 2];

    for class in 0..2u8 {
        let mut members: Vec<usize> = (0..n).filter(|&i| observed_labels[i] == class).collect();
        members.sort_by(|&a, &b| {
            clean_posterior[b]
                .partial_cmp(&clean_posterior[a])
                .expect("posteriors are finite")
                .then(a.cmp(&b))
        });
        let want = budget.min(members.len());
        capped[class as usize] = members.len() < budget;
        taken[class as usize] = want;
        for &i in members.iter().take(want) {
            selected[i] = true;
        }
    }

    Ok((
        SelectionMask {
            selected,
            clean_posterior: clean_posterior.to_vec(),
        },
        UniformStats {
            per_class_budget: budget,
            taken,
            capped,
        },
    ))
}

/// Agreement of a selection with ground truth: fraction of samples where
/// selected coincides with not-flipped, plus precision/recall of the clean
/// class.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SelectionQuality {
    pub agreement: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

impl SelectionQuality {
    pub fn score(selected: &[bool], flip_mask: &[bool]) -> Result<Self> {
        if selected.len() != flip_mask.len() || selected.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{} selections vs {} flips",
                selected.len(),
                flip_mask.len()
            )));
        }
        let n = selected.len() as f64;
        let mut agree = 0usize;
        let mut sel_clean = 0usize;
        let mut sel_total = 0usize;
        let mut clean_total = 0usize;
        for (&s, &f) in selected.iter().zip(flip_mask) {
            if s == !f {
                agree += 1;
            }
            if s {
                sel_total += 1;
                if !f {
                    sel_clean += 1;
                }
            }
            if !f {
                clean_total += 1;
            }
        }
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        Ok(Self {
            agreement: agree as f64 / n,
            precision: ratio(sel_clean, sel_total),
            recall: ratio(sel_clean, clean_total),
        })
    }
}
