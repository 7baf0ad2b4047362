//! Two-component 1-D Gaussian mixture fitted with EM.
//!
//! Components are ordered so index 0 is the low-mean (clean) component.
//! Initialization splits the sorted values at the median, which is
//! deterministic and avoids label switching. Responsibilities and the
//! log-likelihood are computed in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// EM fitting knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmmOptions {
    /// Stop when the log-likelihood improves by less than this.
    pub tol: f64,
    pub max_iter: usize,
    /// Lower bound on component variances.
    pub var_floor: f64,
}

impl Default for GmmOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 100,
            var_floor: 1e-6,
        }
    }
}

impl GmmOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tol must be finite and > 0, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        if !(self.var_floor > 0.0) || !self.var_floor.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "var_floor must be finite and > 0, got {}",
                self.var_floor
            )));
        }
        Ok(())
    }
}

/// Fitted mixture; component 0 is clean (lower mean).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gmm1d {
    pub means: (f64, f64),
    pub variances: (f64, f64),
    pub weights: (f64, f64),
    /// Log-likelihood after each EM iteration.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Gmm1d {
    /// Mixing weight of the clean component; used as the selection budget
    /// estimate by the class-uniform selector.
    pub fn clean_mass(&self) -> f64 {
        self.weights.0
    }
}

fn log_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + d * d / var)
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn moments(values: &[f64], var_floor: f64) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.max(var_floor))
}

/// Fit the mixture by EM. Requires at least two distinct values; identical
/// values are degenerate and the caller should fall back to selecting all
/// samples.
pub fn fit_gmm_em(losses: &[f64], options: &GmmOptions) -> Result<Gmm1d> {
    options.validate()?;
    if losses.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two loss values".into(),
        ));
    }
    if losses.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidParameter("non-finite loss".into()));
    }
    let lo = losses.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Err(Error::DegenerateLosses);
    }

    // Median split: component stats from the lower and upper halves.
    let mut sorted = losses.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mid = sorted.len() / 2;
    let (m0, v0) = moments(&sorted[..mid.max(1)], options.var_floor);
    let (m1, v1) = moments(&sorted[mid.min(sorted.len() - 1)..], options.var_floor);

    let n = losses.len() as f64;
    let mut means = [m0, m1];
    let mut vars = [v0, v1];
    let mut weights: [f64; 2] = [0.5, 0.5];
    let mut ll_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    let mut resp0 = vec![0.0f64; losses.len()];
    for iter in 0..options.max_iter {
        iterations = iter + 1;

        // E-step in log space.
        let mut ll = 0.0;
        for (i, &x) in losses.iter().enumerate() {
            let l0 = weights[0].ln() + log_normal_pdf(x, means[0], vars[0]);
            let l1 = weights[1].ln() + log_normal_pdf(x, means[1], vars[1]);
            let lse = log_sum_exp(l0, l1);
            resp0[i] = (l0 - lse).exp();
            ll += lse;
        }
        debug_assert!(
            ll_trace.last().is_none_or(|&prev| ll + 1e-9 >= prev),
            "EM log-likelihood decreased"
        );
        let improved = ll_trace.last().map(|&prev| ll - prev);
        ll_trace.push(ll);
        if let Some(delta) = improved {
            if delta.abs() < options.tol {
                converged = true;
                break;
            }
        }

        // M-step.
        for k in 0..2 {
            let rk: Vec<f64> = resp0
                .iter()
                .map(|&r0| if k == 0 { r0 } else { 1.0 - r0 })
                .collect();
            let total: f64 = rk.iter().sum();
            if total > 1e-300 {
                let mean = rk
                    .iter()
                    .zip(losses)
                    .map(|(r, x)| r * x)
                    .sum::<f64>()
                    / total;
                let var = rk
                    .iter()
                    .zip(losses)
                    .map(|(r, x)| r * (x - mean) * (x - mean))
                    .sum::<f64>()
                    / total;
                means[k] = mean;
                vars[k] = var.max(options.var_floor);
            }
            weights[k] = (total / n).max(1e-10);
        }
        let wsum = weights[0] + weights[1];
        weights[0] /= wsum;
        weights[1] /= wsum;
    }

    // Order components: clean = low mean.
    if means[0] > means[1] {
        means.swap(0, 1);
        vars.swap(0, 1);
        weights.swap(0, 1);
    }

    Ok(Gmm1d {
        means: (means[0], means[1]),
        variances: (vars[0], vars[1]),
        weights: (weights[0], weights[1]),
        log_likelihood: ll_trace,
        iterations,
        converged,
    })
}

/// Posterior probability that `loss` came from the clean (low-mean)
/// component. Computed in log space so the denominator never vanishes.
pub fn clean_posterior(loss: f64, gmm: &Gmm1d) -> f64 {
    let l0 = gmm.weights.0.ln() + log_normal_pdf(loss, gmm.means.0, gmm.variances.0);
    let l1 = gmm.weights.1.ln() + log_normal_pdf(loss, gmm.means.1, gmm.variances.1);
    (l0 - log_sum_exp(l0, l1)).exp()
}
