//! Compact feed-forward binary classifier with hand-derived gradients.
//!
//! Rectified hidden layers, two output logits, softmax. Initialization is
//! seeded uniform scaled by 1/sqrt(fan_in) so runs are reproducible. The
//! checkpoint format is JSON of layer shapes plus row-major values and
//! round-trips f64 bit-exactly.

mod loss;
mod optim;

pub use loss::{
    cs_loss_per_sample, hard_label_delta, mse_output_delta, semi_loss, soft_ce_delta,
    soft_ce_value, CostWeights, PROB_FLOOR,
};
pub use optim::{cosine_lr, sgd_momentum_step, OptimState};

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One dense layer: `weights` is (fan_in, fan_out), bias is (fan_out,).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Parameters of the classifier; the final layer always has fan_out 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
}

/// Per-layer gradients, shaped like the parameters they refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    /// Elementwise sum, for objectives with several backpropagated terms.
    pub fn accumulate(&mut self, other: &Gradients) -> crate::error::Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::ShapeMismatch("gradient layer count".into()));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            if a.weights.raw_dim() != b.weights.raw_dim() {
                return Err(Error::ShapeMismatch("gradient tensor shape".into()));
            }
            a.weights += &b.weights;
            a.bias += &b.bias;
        }
        Ok(())
    }
}

/// Cached activations from a forward pass, reused by backprop.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// `activations[0]` is the input; `activations[k]` the rectified output
    /// of layer k-1.
    pub activations: Vec<Array2<f64>>,
    pub logits: Array2<f64>,
    pub probs: Array2<f64>,
}

pub const N_CLASSES: usize = 2;

impl MlpParams {
    /// Seeded initialization: weights uniform in +-1/sqrt(fan_in), zero bias.
    pub fn init(input_dim: usize, hidden: &[usize], seed: u64) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidParameter("input_dim must be > 0".into()));
        }
        if hidden.contains(&0) {
            return Err(Error::InvalidParameter("hidden widths must be > 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(N_CLASSES);

        let layers = dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let scale = 1.0 / (fan_in as f64).sqrt();
                let weights = Array2::from_shape_fn((fan_in, fan_out), |_| {
                    rng.random_range(-scale..scale)
                });
                Layer {
                    weights,
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.nrows()
    }

    /// Zero-filled gradient/momentum container with matching shapes.
    pub fn zeros_like(&self) -> Gradients {
        Gradients {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    bias: Array1::zeros(l.bias.raw_dim()),
                })
                .collect(),
        }
    }

    /// Forward pass over a batch (rows = samples).
    ///
    /// Probabilities are the row-wise softmax of the logits, computed with
    /// max subtraction; each row sums to 1 within 1e-9.
    pub fn forward(&self, features: &Array2<f64>) -> Result<ForwardPass> {
        if features.ncols() != self.input_dim() {
            return Err(Error::ShapeMismatch(format!(
                "input has {} columns, first layer expects {}",
                features.ncols(),
                self.input_dim()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { layer: None });
        }

        let mut activations = vec![features.clone()];
        let mut current = features.clone();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = current.dot(&layer.weights) + &layer.bias;
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { layer: Some(k) });
            }
            if k + 1 < self.layers.len() {
                z.mapv_inplace(|v| v.max(0.0));
                activations.push(z.clone());
                current = z;
            } else {
                let probs = softmax_rows(&z);
                return Ok(ForwardPass {
                    activations,
                    logits: z,
                    probs,
                });
            }
        }
        unreachable!("at least one layer exists")
    }

    /// Positive-class probabilities.
    pub fn predict_proba(&self, features: &Array2<f64>) -> Result<Vec<f64>> {
        let pass = self.forward(features)?;
        Ok(pass.probs.column(1).to_vec())
    }

    /// Hard decisions: 1 iff p(positive) >= threshold (ties go positive).
    pub fn predict(&self, features: &Array2<f64>, threshold: f64) -> Result<Vec<u8>> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold {threshold} outside (0, 1)"
            )));
        }
        Ok(self
            .predict_proba(features)?
            .into_iter()
            .map(|p| u8::from(p >= threshold))
            .collect())
    }

    /// Backpropagate an output-layer delta (dLoss/dLogits, already including
    /// any batch scaling) through the cached forward pass.
    pub fn backward_from_delta(&self, pass: &ForwardPass, delta: &Array2<f64>) -> Result<Gradients> {
        if delta.raw_dim() != pass.logits.raw_dim() {
            return Err(Error::ShapeMismatch("output delta shape".into()));
        }
        let mut grads = self.zeros_like();
        let mut delta = delta.clone();
        for k in (0..self.layers.len()).rev() {
            let input = &pass.activations[k];
            grads.layers[k].weights = input.t().dot(&delta);
            grads.layers[k].bias = delta.sum_axis(Axis(0));
            if grads.layers[k].weights.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { layer: Some(k) });
            }
            if k > 0 {
                let mut upstream = delta.dot(&self.layers[k].weights.t());
                // Rectifier gate: activation zero means the unit was off.
                upstream
                    .iter_mut()
                    .zip(pass.activations[k].iter())
                    .for_each(|(u, &a)| {
                        if a <= 0.0 {
                            *u = 0.0;
                        }
                    });
                delta = upstream;
            }
        }
        Ok(grads)
    }

    /// Gradients of the mean cost-sensitive cross-entropy over a batch.
    pub fn backward(
        &self,
        pass: &ForwardPass,
        labels: &[u8],
        weights: &CostWeights,
    ) -> Result<Gradients> {
        if labels.is_empty() {
            return Err(Error::InvalidParameter("empty batch".into()));
        }
        let delta = hard_label_delta(&pass.probs, labels, weights)?;
        self.backward_from_delta(pass, &delta)
    }

    /// Checkpoint to JSON; f64 values round-trip bit-exactly.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let params: Self = serde_json::from_str(json)?;
        if params.layers.is_empty() {
            return Err(Error::InvalidParameter("checkpoint has no layers".into()));
        }
        for (k, pair) in params.layers.windows(2).enumerate() {
            if pair[0].weights.ncols() != pair[1].weights.nrows() {
                return Err(Error::ShapeMismatch(format!(
                    "layer {k} fan_out {} does not chain into layer {} fan_in {}",
                    pair[0].weights.ncols(),
                    k + 1,
                    pair[1].weights.nrows()
                )));
            }
        }
        if params.layers.last().unwrap().weights.ncols() != N_CLASSES {
            return Err(Error::ShapeMismatch("final fan_out must be 2".into()));
        }
        Ok(params)
    }
}

fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut probs = logits.clone();
    for mut row in probs.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    probs
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn zero_net(input: usize, hidden: &[usize]) -> MlpParams {
        let mut p = MlpParams::init(input, hidden, 0).unwrap();
        for layer in &mut p.layers {
            layer.weights.fill(0.0);
            layer.bias.fill(0.0);
        }
        p
    }

    #[test]
    fn zero_net_outputs_half() {
        let p = zero_net(3, &[4]);
        let x = arr2(&[[1.0, -2.0, 0.5], [0.0, 0.0, 0.0]]);
        let pass = p.forward(&x).unwrap();
        for row in pass.probs.rows() {
            assert!((row[0] - 0.5).abs() < 1e-15);
            assert!((row[1] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn probs_are_normalized() {
        let p = MlpParams::init(5, &[16, 16], 42).unwrap();
        let x = Array2::from_shape_fn((10, 5), |(i, j)| ((i * 5 + j) as f64).sin() * 3.0);
        let pass = p.forward(&x).unwrap();
        for row in pass.probs.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn softmax_of_known_logits() {
        // One linear layer with identity-ish weights to produce logits [2, 0].
        let mut p = zero_net(2, &[]);
        p.layers[0].weights = arr2(&[[1.0, 0.0], [0.0, 1.0]]);
        let x = arr2(&[[2.0, 0.0]]);
        let pass = p.forward(&x).unwrap();
        let e2 = 2.0f64.exp();
        assert!((pass.probs[[0, 0]] - e2 / (e2 + 1.0)).abs() < 1e-12);
        assert!((pass.probs[[0, 1]] - 1.0 / (e2 + 1.0)).abs() < 1e-12);
        assert!((pass.probs[[0, 0]] - 0.8808).abs() < 1e-4);
    }

    #[test]
    fn softmax_shift_invariance() {
        let p = MlpParams::init(4, &[8], 3).unwrap();
        let x = Array2::from_shape_fn((6, 4), |(i, j)| (i as f64 - j as f64) * 0.7);
        let pass = p.forward(&x).unwrap();
        let shifted = softmax_rows(&(pass.logits.clone() + 13.5));
        for (a, b) in pass.probs.iter().zip(shifted.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn forward_rejects_bad_input() {
        let p = MlpParams::init(3, &[4], 0).unwrap();
        let wrong_cols = Array2::zeros((2, 4));
        assert!(p.forward(&wrong_cols).is_err());
        let non_finite = arr2(&[[f64::NAN, 0.0, 1.0]]);
        assert!(p.forward(&non_finite).is_err());
    }

    #[test]
    fn predict_threshold_and_ties() {
        let probe = |p1: f64, threshold: f64| -> u8 {
            u8::from(p1 >= threshold)
        };
        assert_eq!(probe(0.7, 0.5), 1);
        assert_eq!(probe(0.5, 0.5), 1); // tie goes to positive
        assert_eq!(probe(0.7, 0.9), 0);
    }

    #[test]
    fn checkpoint_round_trips_bit_exactly() {
        let p = MlpParams::init(7, &[9, 5], 1234).unwrap();
        let json = p.to_json().unwrap();
        let back = MlpParams::from_json(&json).unwrap();
        assert_eq!(p, back);
        for (a, b) in p.layers.iter().zip(&back.layers) {
            for (x, y) in a.weights.iter().zip(b.weights.iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn checkpoint_rejects_broken_chain() {
        let p = MlpParams::init(3, &[4], 0).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&p.to_json().unwrap()).unwrap();
        // Corrupt the second layer's weight shape.
        value["layers"][1]["weights"]["dim"] = serde_json::json!([7, 2]);
        let json = value.to_string();
        assert!(MlpParams::from_json(&json).is_err());
    }

    #[test]
    fn init_is_seeded() {
        let a = MlpParams::init(6, &[8], 9).unwrap();
        let b = MlpParams::init(6, &[8], 9).unwrap();
        let c = MlpParams::init(6, &[8], 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let bound = 1.0 / 6.0f64.sqrt();
        assert!(a.layers[0].weights.iter().all(|w| w.abs() < bound));
    }
}
