//! SGD with classic momentum and cosine-annealed learning rate.

use serde::{Deserialize, Serialize};

use super::{Gradients, MlpParams};
use crate::error::{Error, Result};

/// Cosine annealing from `base_lr` at epoch 0 towards 0:
/// `lr(t) = 0.5 * base_lr * (1 + cos(pi * t / total))`.
pub fn cosine_lr(epoch: usize, total_epochs: usize, base_lr: f64) -> Result<f64> {
    if total_epochs == 0 {
        return Err(Error::InvalidParameter("total_epochs must be > 0".into()));
    }
    if epoch >= total_epochs {
        return Err(Error::InvalidParameter(format!(
            "epoch {epoch} out of range for schedule of {total_epochs}"
        )));
    }
    if !base_lr.is_finite() || base_lr <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "base_lr must be finite and positive, got {base_lr}"
        )));
    }
    let frac = epoch as f64 / total_epochs as f64;
    Ok(0.5 * base_lr * (1.0 + (std::f64::consts::PI * frac).cos()))
}

/// Momentum buffers plus the schedule they are stepped under.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimState {
    pub momentum: f64,
    pub base_lr: f64,
    pub total_epochs: usize,
    buffers: Vec<super::Layer>,
}

impl OptimState {
    pub fn new(params: &MlpParams, momentum: f64, base_lr: f64, total_epochs: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&momentum) {
            return Err(Error::InvalidParameter(format!(
                "momentum {momentum} outside [0, 1)"
            )));
        }
        cosine_lr(0, total_epochs, base_lr)?;
        Ok(Self {
            momentum,
            base_lr,
            total_epochs,
            buffers: params.zeros_like().layers,
        })
    }

    pub fn lr_at(&self, epoch: usize) -> Result<f64> {
        cosine_lr(epoch, self.total_epochs, self.base_lr)
    }

    /// One update: `buffer <- momentum * buffer + grad`,
    /// `param <- param - lr(epoch) * buffer`.
    pub fn step(&mut self, params: &mut MlpParams, grads: &Gradients, epoch: usize) -> Result<()> {
        sgd_momentum_step(params, grads, self, epoch)
    }
}

/// Free-function form of the momentum update, mutating `params` in place.
pub fn sgd_momentum_step(
    params: &mut MlpParams,
    grads: &Gradients,
    state: &mut OptimState,
    epoch: usize,
) -> Result<()> {
    if grads.layers.len() != params.layers.len() {
        return Err(Error::ShapeMismatch("gradient layer count".into()));
    }
    let lr = state.lr_at(epoch)?;
    for ((layer, grad), buf) in params
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .zip(&mut state.buffers)
    {
        if layer.weights.raw_dim() != grad.weights.raw_dim()
            || layer.bias.raw_dim() != grad.bias.raw_dim()
        {
            return Err(Error::ShapeMismatch("gradient tensor shape".into()));
        }
        buf.weights
            .zip_mut_with(&grad.weights, |b, &g| *b = state.momentum * *b + g);
        buf.bias
            .zip_mut_with(&grad.bias, |b, &g| *b = state.momentum * *b + g);
        layer
            .weights
            .zip_mut_with(&buf.weights, |p, &b| *p -= lr * b);
        layer.bias.zip_mut_with(&buf.bias, |p, &b| *p -= lr * b);
    }
    Ok(())
}
