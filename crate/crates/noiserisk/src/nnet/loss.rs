//! Cost-sensitive cross-entropy and the semi-supervised objective.
//!
//! The class-weighted loss for one sample with observed label y is
//! `-w_y * ln p_y`; weights default to 1 for the majority class and 20 for
//! the minority class, mirroring the false-negative / false-positive cost
//! asymmetry used by the risk metrics. Probabilities are floored at 1e-12
//! inside the log so the loss stays finite.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied to probabilities before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

/// Per-class loss weights; `w1` is the positive (minority) class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostWeights {
    pub w0: f64,
    pub w1: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { w0: 1.0, w1: 20.0 }
    }
}

impl CostWeights {
    /// Uniform weights: plain cross-entropy.
    pub fn uniform() -> Self {
        Self { w0: 1.0, w1: 1.0 }
    }

    pub fn new(w0: f64, w1: f64) -> Result<Self> {
        if !(w0.is_finite() && w1.is_finite()) || w0 <= 0.0 || w1 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "class weights must be finite and positive, got ({w0}, {w1})"
            )));
        }
        Ok(Self { w0, w1 })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.w0, self.w1).map(|_| ())
    }

    pub fn weight_for(&self, label: u8) -> f64 {
        if label == 1 {
            self.w1
        } else {
            self.w0
        }
    }

    /// Expected weight under a soft label q = (q0, q1).
    pub fn expected_weight(&self, q0: f64, q1: f64) -> f64 {
        q0 * self.w0 + q1 * self.w1
    }
}

fn check_probs(probs: &Array2<f64>, n: usize) -> Result<()> {
    if probs.nrows() != n || probs.ncols() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "expected ({n}, 2) probabilities, got ({}, {})",
            probs.nrows(),
            probs.ncols()
        )));
    }
    Ok(())
}

/// Per-sample weighted cross-entropy `-w_y * ln max(p_y, floor)`.
pub fn cs_loss_per_sample(
    probs: &Array2<f64>,
    labels: &[u8],
    weights: &CostWeights,
) -> Result<Vec<f64>> {
    check_probs(probs, labels.len())?;
    labels
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            if y > 1 {
                return Err(Error::InvalidParameter(format!(
                    "label {y} at row {i} is not binary"
                )));
            }
            let p = probs[[i, y as usize]].max(PROB_FLOOR);
            Ok(-weights.weight_for(y) * p.ln())
        })
        .collect()
}

/// dLoss/dLogits for the mean weighted cross-entropy over hard labels:
/// row i is `w_y * (p_i - onehot(y_i)) / n`.
pub fn hard_label_delta(
    probs: &Array2<f64>,
    labels: &[u8],
    weights: &CostWeights,
) -> Result<Array2<f64>> {
    check_probs(probs, labels.len())?;
    let n = labels.len() as f64;
    let mut delta = probs.clone();
    for (i, &y) in labels.iter().enumerate() {
        if y > 1 {
            return Err(Error::InvalidParameter(format!(
                "label {y} at row {i} is not binary"
            )));
        }
        delta[[i, y as usize]] -= 1.0;
        let w = weights.weight_for(y) / n;
        delta[[i, 0]] *= w;
        delta[[i, 1]] *= w;
    }
    Ok(delta)
}

/// dLoss/dLogits for mean weighted soft-target cross-entropy
/// `-omega_i * sum_k q_ik ln p_ik`, where `omega_i` is the expected class
/// weight of target row i. Row i of the result is
/// `omega_i * (p_i - q_i) / n`.
pub fn soft_ce_delta(
    probs: &Array2<f64>,
    targets: &Array2<f64>,
    weights: &CostWeights,
) -> Result<Array2<f64>> {
    check_probs(probs, targets.nrows())?;
    check_probs(targets, probs.nrows())?;
    let n = probs.nrows() as f64;
    let mut delta = probs - targets;
    for (i, t) in targets.rows().into_iter().enumerate() {
        let w = weights.expected_weight(t[0], t[1]) / n;
        delta[[i, 0]] *= w;
        delta[[i, 1]] *= w;
    }
    Ok(delta)
}

/// dLoss/dLogits for the mean squared error between probabilities and
/// targets, `mean over samples and classes of (p - q)^2`, differentiated
/// through the softmax.
///
/// With g = dL/dp, the chain rule through row-wise softmax gives
/// `dL/dz_k = p_k * (g_k - sum_j g_j p_j)`.
pub fn mse_output_delta(probs: &Array2<f64>, targets: &Array2<f64>) -> Result<Array2<f64>> {
    check_probs(probs, targets.nrows())?;
    check_probs(targets, probs.nrows())?;
    let n = probs.nrows() as f64;
    let k = probs.ncols() as f64;
    let g = (probs - targets) * (2.0 / (n * k));
    let mut delta = Array2::zeros(probs.raw_dim());
    for i in 0..probs.nrows() {
        let dot: f64 = (0..probs.ncols()).map(|j| g[[i, j]] * probs[[i, j]]).sum();
        for c in 0..probs.ncols() {
            delta[[i, c]] = probs[[i, c]] * (g[[i, c]] - dot);
        }
    }
    Ok(delta)
}

/// Mean weighted soft-target cross-entropy
/// `mean_i omega_i * sum_k -q_ik ln max(p_ik, floor)`.
pub fn soft_ce_value(
    probs: &Array2<f64>,
    targets: &Array2<f64>,
    weights: &CostWeights,
) -> Result<f64> {
    check_probs(probs, targets.nrows())?;
    check_probs(targets, probs.nrows())?;
    if probs.nrows() == 0 {
        return Err(Error::InvalidParameter(
            "cross-entropy needs a non-empty batch".into(),
        ));
    }
    let mut ce = 0.0;
    for (p, q) in probs.rows().into_iter().zip(targets.rows()) {
        let w = weights.expected_weight(q[0], q[1]);
        let row: f64 = (0..2).map(|c| -q[c] * p[c].max(PROB_FLOOR).ln()).sum();
        ce += w * row;
    }
    Ok(ce / probs.nrows() as f64)
}

/// Value of the combined semi-supervised objective:
/// mean weighted soft cross-entropy on the labeled batch plus
/// `lambda_u` times the mean squared error on the unlabeled batch.
///
/// Returns `(total, labeled_term, unlabeled_term)`.
pub fn semi_loss(
    labeled_probs: &Array2<f64>,
    labeled_targets: &Array2<f64>,
    unlabeled_probs: &Array2<f64>,
    unlabeled_targets: &Array2<f64>,
    lambda_u: f64,
    weights: &CostWeights,
) -> Result<(f64, f64, f64)> {
    check_probs(labeled_probs, labeled_targets.nrows())?;
    check_probs(unlabeled_probs, unlabeled_targets.nrows())?;
    if !lambda_u.is_finite() || lambda_u < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda_u must be finite and >= 0, got {lambda_u}"
        )));
    }
    if labeled_probs.nrows() == 0 || unlabeled_probs.nrows() == 0 {
        return Err(Error::InvalidParameter(
            "semi-supervised batches must be non-empty".into(),
        ));
    }

    let labeled_term = soft_ce_value(labeled_probs, labeled_targets, weights)?;

    let diff = unlabeled_probs - unlabeled_targets;
    let unlabeled_term = diff.mapv(|v| v * v).mean().unwrap();

    Ok((
        labeled_term + lambda_u * unlabeled_term,
        labeled_term,
        unlabeled_term,
    ))
}
