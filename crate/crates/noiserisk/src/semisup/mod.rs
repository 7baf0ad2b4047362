//! Semi-supervised building blocks used by the divide-style methods:
//! feature-space augmentation, label co-refinement and co-guessing,
//! temperature sharpening, mixup, and the ramped unlabeled-loss weight.
//!
//! All functions are pure given an explicit rng handle. The combined
//! objective value lives in [`crate::nnet::semi_loss`] next to its gradient;
//! it is re-exported here.

pub use crate::nnet::semi_loss;

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand_distr::{Beta, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability pair over the two classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftLabel {
    pub q0: f64,
    pub q1: f64,
}

impl SoftLabel {
    pub fn new(q0: f64, q1: f64) -> Result<Self> {
        let label = Self { q0, q1 };
        label.validate()?;
        Ok(label)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.q0)
            && (0.0..=1.0).contains(&self.q1)
            && (self.q0 + self.q1 - 1.0).abs() <= 1e-9;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "({}, {}) is not a probability pair",
                self.q0, self.q1
            )))
        }
    }

    pub fn onehot(label: u8) -> Self {
        if label == 1 {
            Self { q0: 0.0, q1: 1.0 }
        } else {
            Self { q0: 1.0, q1: 0.0 }
        }
    }

    pub fn argmax(&self) -> u8 {
        u8::from(self.q1 >= self.q0)
    }
}

/// Hyperparameters of the semi-supervised stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SemiConfig {
    /// Sharpening temperature; 1 disables sharpening.
    pub temperature: f64,
    /// Mixup Beta concentration.
    pub alpha: f64,
    /// Augmented views per sample.
    pub augmentations: usize,
    /// Augmentation noise scale as a multiple of per-dimension feature std.
    pub sigma_aug_scale: f64,
    /// Final unlabeled-loss weight.
    pub lambda_u: f64,
    /// Epochs over which lambda_u ramps linearly from zero.
    pub ramp_epochs: usize,
}

impl Default for SemiConfig {
    fn default() -> Self {
        Self {
            temperature: 0.5,
            alpha: 4.0,
            augmentations: 2,
            sigma_aug_scale: 0.1,
            lambda_u: 25.0,
            ramp_epochs: 16,
        }
    }
}

impl SemiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "temperature must be > 0, got {}",
                self.temperature
            )));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if self.augmentations == 0 {
            return Err(Error::InvalidParameter("augmentations must be >= 1".into()));
        }
        if !(self.sigma_aug_scale >= 0.0) || !self.sigma_aug_scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma_aug_scale must be >= 0, got {}",
                self.sigma_aug_scale
            )));
        }
        if !(self.lambda_u >= 0.0) || !self.lambda_u.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda_u must be >= 0, got {}",
                self.lambda_u
            )));
        }
        if self.ramp_epochs == 0 {
            return Err(Error::InvalidParameter("ramp_epochs must be >= 1".into()));
        }
        Ok(())
    }

    /// Unlabeled-loss weight after `epochs_past_warmup` epochs: linear from
    /// 0 up to `lambda_u` over `ramp_epochs`.
    pub fn lambda_at(&self, epochs_past_warmup: usize) -> f64 {
        let frac = (epochs_past_warmup as f64 / self.ramp_epochs as f64).min(1.0);
        self.lambda_u * frac
    }
}

/// Add seeded zero-mean Gaussian noise with scale `sigma_aug` to every
/// dimension; `sigma_aug = 0` is the identity.
pub fn augment<R: Rng>(row: ArrayView1<f64>, sigma_aug: f64, rng: &mut R) -> Result<Array1<f64>> {
    if !(sigma_aug >= 0.0) || !sigma_aug.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma_aug must be >= 0, got {sigma_aug}"
        )));
    }
    if sigma_aug == 0.0 {
        return Ok(row.to_owned());
    }
    let normal = Normal::new(0.0, sigma_aug).expect("sigma validated");
    Ok(row.mapv(|v| v + normal.sample(rng)))
}

/// Row-by-row [`augment`] in storage order.
pub fn augment_batch<R: Rng>(
    features: &Array2<f64>,
    sigma_aug: f64,
    rng: &mut R,
) -> Result<Array2<f64>> {
    let mut out = features.clone();
    if sigma_aug == 0.0 {
        return Ok(out);
    }
    if !(sigma_aug >= 0.0) || !sigma_aug.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma_aug must be >= 0, got {sigma_aug}"
        )));
    }
    let normal = Normal::new(0.0, sigma_aug).expect("sigma validated");
    out.mapv_inplace(|v| v + normal.sample(rng));
    Ok(out)
}

/// Refine a noisy observed label towards the model consensus:
/// `q = w * onehot(y) + (1 - w) * p_bar`.
pub fn co_refine(observed_label: u8, clean_posterior: f64, avg_pred: SoftLabel) -> Result<SoftLabel> {
    if observed_label > 1 {
        return Err(Error::InvalidParameter(format!(
            "label {observed_label} is not binary"
        )));
    }
    if !(0.0..=1.0).contains(&clean_posterior) {
        return Err(Error::InvalidParameter(format!(
            "posterior {clean_posterior} outside [0, 1]"
        )));
    }
    avg_pred.validate()?;
    let onehot = SoftLabel::onehot(observed_label);
    let w = clean_posterior;
    SoftLabel::new(
        w * onehot.q0 + (1.0 - w) * avg_pred.q0,
        w * onehot.q1 + (1.0 - w) * avg_pred.q1,
    )
}

/// Average predictions from both networks across augmentations and
/// renormalize.
pub fn co_guess(predictions: &[SoftLabel]) -> Result<SoftLabel> {
    if predictions.is_empty() {
        return Err(Error::InvalidParameter("no predictions to guess from".into()));
    }
    let mut q0 = 0.0;
    let mut q1 = 0.0;
    for p in predictions {
        p.validate()?;
        q0 += p.q0;
        q1 += p.q1;
    }
    let sum = q0 + q1;
    SoftLabel::new(q0 / sum, q1 / sum)
}

/// Temperature sharpening: `q_k = p_k^(1/T) / sum_j p_j^(1/T)`.
/// Entries are floored at 1e-12 before powering so zero entries stay safe
/// for any T.
pub fn sharpen(p: SoftLabel, temperature: f64) -> Result<SoftLabel> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "temperature must be > 0, got {temperature}"
        )));
    }
    p.validate()?;
    let inv_t = 1.0 / temperature;
    let a = p.q0.max(1e-12).powf(inv_t);
    let b = p.q1.max(1e-12).powf(inv_t);
    let sum = a + b;
    SoftLabel::new(a / sum, b / sum)
}

/// One mixup draw: `lambda ~ Beta(alpha, alpha)`, `lambda' = max(lambda,
/// 1 - lambda)`, so the output is always dominated by the first argument.
pub fn mixup_lambda<R: Rng>(alpha: f64, rng: &mut R) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    let beta = Beta::new(alpha, alpha)
        .map_err(|e| Error::InvalidParameter(format!("Beta({alpha}, {alpha}): {e}")))?;
    let lambda: f64 = beta.sample(rng);
    Ok(lambda.max(1.0 - lambda))
}

/// Mix two (features, label) pairs with a fresh lambda draw.
pub fn mixup<R: Rng>(
    a: (ArrayView1<f64>, SoftLabel),
    b: (ArrayView1<f64>, SoftLabel),
    alpha: f64,
    rng: &mut R,
) -> Result<(Array1<f64>, SoftLabel)> {
    if a.0.len() != b.0.len() {
        return Err(Error::ShapeMismatch(format!(
            "feature lengths {} vs {}",
            a.0.len(),
            b.0.len()
        )));
    }
    a.1.validate()?;
    b.1.validate()?;
    let l = mixup_lambda(alpha, rng)?;
    let features = &a.0 * l + &b.0 * (1.0 - l);
    let label = SoftLabel::new(
        l * a.1.q0 + (1.0 - l) * b.1.q0,
        l * a.1.q1 + (1.0 - l) * b.1.q1,
    )?;
    Ok((features, label))
}

/// Batch mixup: row i of the output mixes row i of `(xa, qa)` with row i of
/// `(xb, qb)` under its own lambda draw. Targets are (n, 2) soft rows.
pub fn mixup_batch<R: Rng>(
    xa: &Array2<f64>,
    qa: &Array2<f64>,
    xb: &Array2<f64>,
    qb: &Array2<f64>,
    alpha: f64,
    rng: &mut R,
) -> Result<(Array2<f64>, Array2<f64>)> {
    if xa.raw_dim() != xb.raw_dim() || qa.raw_dim() != qb.raw_dim() || qa.nrows() != xa.nrows() {
        return Err(Error::ShapeMismatch("mixup batch shapes".into()));
    }
    let mut x = xa.clone();
    let mut q = qa.clone();
    for i in 0..xa.nrows() {
        let l = mixup_lambda(alpha, rng)?;
        for j in 0..xa.ncols() {
            x[[i, j]] = l * xa[[i, j]] + (1.0 - l) * xb[[i, j]];
        }
        for j in 0..2 {
            q[[i, j]] = l * qa[[i, j]] + (1.0 - l) * qb[[i, j]];
        }
    }
    Ok((x, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr1;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn augment_zero_sigma_is_identity() {
        let row = arr1(&[1.0, -2.0, 3.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = augment(row.view(), 0.0, &mut rng).unwrap();
        assert_eq!(out, row);
    }

    #[test]
    fn augment_is_deterministic_given_rng_state() {
        let row = arr1(&[0.5, 0.5, 0.5, 0.5]);
        let a = augment(row.view(), 0.3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = augment(row.view(), 0.3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn augment_noise_scale_matches_sigma() {
        let sigma = 0.25;
        let n = 100_000;
        let row = Array1::zeros(n);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let out = augment(row.view(), sigma, &mut rng).unwrap();
        let mean = out.sum() / n as f64;
        let var = out.mapv(|v| (v - mean) * (v - mean)).sum() / n as f64;
        let std = var.sqrt();
        assert!(
            (std - sigma).abs() / sigma < 0.02,
            "empirical std {std} vs {sigma}"
        );
    }

    #[test]
    fn co_refine_endpoints_and_midpoint() {
        let p = SoftLabel::new(0.3, 0.7).unwrap();
        let full_trust = co_refine(1, 1.0, p).unwrap();
        assert_eq!((full_trust.q0, full_trust.q1), (0.0, 1.0));

        let no_trust = co_refine(1, 0.0, p).unwrap();
        assert!((no_trust.q0 - 0.3).abs() < 1e-15);
        assert!((no_trust.q1 - 0.7).abs() < 1e-15);

        let half = co_refine(0, 0.5, SoftLabel::new(0.2, 0.8).unwrap()).unwrap();
        assert!((half.q0 - 0.6).abs() < 1e-15);
        assert!((half.q1 - 0.4).abs() < 1e-15);
    }

    #[test]
    fn co_guess_means() {
        let single = co_guess(&[SoftLabel::new(0.25, 0.75).unwrap()]).unwrap();
        assert!((single.q1 - 0.75).abs() < 1e-15);

        let two = co_guess(&[
            SoftLabel::new(0.2, 0.8).unwrap(),
            SoftLabel::new(0.6, 0.4).unwrap(),
        ])
        .unwrap();
        assert!((two.q0 - 0.4).abs() < 1e-15);
        assert!((two.q1 - 0.6).abs() < 1e-15);

        let p = SoftLabel::new(0.35, 0.65).unwrap();
        let copies = co_guess(&[p; 7]).unwrap();
        assert!((copies.q0 - p.q0).abs() < 1e-12);
        assert!((copies.q1 - p.q1).abs() < 1e-12);
    }

    #[test]
    fn sharpen_known_values() {
        let sym = sharpen(SoftLabel::new(0.5, 0.5).unwrap(), 0.37).unwrap();
        assert!((sym.q0 - 0.5).abs() < 1e-12);

        let id = sharpen(SoftLabel::new(0.8, 0.2).unwrap(), 1.0).unwrap();
        assert!((id.q0 - 0.8).abs() < 1e-12);

        // (0.8, 0.2) at T = 0.5: (0.64, 0.04) / 0.68.
        let sharp = sharpen(SoftLabel::new(0.8, 0.2).unwrap(), 0.5).unwrap();
        assert!((sharp.q0 - 0.64 / 0.68).abs() < 1e-12);
        assert!((sharp.q1 - 0.04 / 0.68).abs() < 1e-12);
        assert!((sharp.q0 - 0.9412).abs() < 1e-4);
    }

    #[test]
    fn sharpen_preserves_argmax_and_handles_zero() {
        for (q0, q1) in [(0.7, 0.3), (0.3, 0.7), (1.0, 0.0), (0.0, 1.0)] {
            let p = SoftLabel::new(q0, q1).unwrap();
            for t in [0.1, 0.5, 1.0, 2.0, 10.0] {
                let s = sharpen(p, t).unwrap();
                assert_eq!(s.argmax(), p.argmax(), "p = {p:?}, T = {t}");
                s.validate().unwrap();
            }
        }
    }

    #[test]
    fn sharpen_concentrates_as_t_shrinks() {
        let p = SoftLabel::new(0.6, 0.4).unwrap();
        let sharp = sharpen(p, 0.1).unwrap();
        assert!(sharp.q0 > 0.97);
    }

    #[test]
    fn mixup_lambda_is_at_least_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1_000 {
            let l = mixup_lambda(4.0, &mut rng).unwrap();
            assert!((0.5..=1.0).contains(&l));
        }
    }

    #[test]
    fn mixup_of_identical_pair_is_identity() {
        let x = arr1(&[1.0, 2.0]);
        let q = SoftLabel::new(0.4, 0.6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (mx, mq) = mixup((x.view(), q), (x.view(), q), 4.0, &mut rng).unwrap();
        for (a, b) in mx.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((mq.q0 - q.q0).abs() < 1e-12);
    }

    #[test]
    fn mixup_labels_stay_on_simplex() {
        let xa = arr1(&[0.0]);
        let xb = arr1(&[1.0]);
        let qa = SoftLabel::new(1.0, 0.0).unwrap();
        let qb = SoftLabel::new(0.1, 0.9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (_, q) = mixup((xa.view(), qa), (xb.view(), qb), 0.75, &mut rng).unwrap();
            q.validate().unwrap();
            // First argument dominates.
            assert!(q.q0 >= 0.5 * (qa.q0 + qb.q0).min(1.0) - 1e-12);
        }
    }

    #[test]
    fn lambda_ramp() {
        let cfg = SemiConfig::default();
        assert_eq!(cfg.lambda_at(0), 0.0);
        assert!((cfg.lambda_at(8) - 12.5).abs() < 1e-12);
        assert!((cfg.lambda_at(16) - 25.0).abs() < 1e-12);
        assert!((cfg.lambda_at(100) - 25.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(SemiConfig::default().validate().is_ok());
        assert!(SemiConfig {
            temperature: 0.0,
            ..SemiConfig::default()
        }
        .validate()
        .is_err());
        assert!(SemiConfig {
            alpha: -1.0,
            ..SemiConfig::default()
        }
        .validate()
        .is_err());
        assert!(SemiConfig {
            augmentations: 0,
            ..SemiConfig::default()
        }
        .validate()
        .is_err());
        assert!(SemiConfig {
            ramp_epochs: 0,
            ..SemiConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn soft_label_validation() {
        assert!(SoftLabel::new(0.5, 0.5).is_ok());
        assert!(SoftLabel::new(0.6, 0.6).is_err());
        assert!(SoftLabel::new(-0.1, 1.1).is_err());
    }

    #[test]
    fn mixup_batch_shapes_and_simplex() {
        let xa = Array2::from_shape_fn((5, 3), |(i, j)| (i + j) as f64);
        let xb = xa.mapv(|v| v + 1.0);
        let qa = Array2::from_shape_fn((5, 2), |(_, j)| if j == 0 { 1.0 } else { 0.0 });
        let qb = Array2::from_shape_fn((5, 2), |(_, j)| if j == 0 { 0.3 } else { 0.7 });
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (x, q) = mixup_batch(&xa, &qa, &xb, &qb, 4.0, &mut rng).unwrap();
        assert_eq!(x.raw_dim(), xa.raw_dim());
        for row in q.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-9);
        }
    }
}
