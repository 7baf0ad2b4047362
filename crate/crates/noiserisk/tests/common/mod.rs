//! Helpers shared across integration suites: central-difference gradient
//! verification for every loss the trainer backpropagates.

#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use noiserisk::nnet::{
    cs_loss_per_sample, hard_label_delta, mse_output_delta, semi_loss, soft_ce_delta, CostWeights,
    Gradients, MlpParams,
};

pub const GRAD_H: f64 = 1e-5;

pub fn random_features(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, dim), |_| StandardNormal.sample(rng))
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.random::<f64>() < 0.4)).collect()
}

pub fn random_soft_targets(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let mut t = Array2::zeros((n, 2));
    for i in 0..n {
        let q1: f64 = rng.random();
        t[[i, 0]] = 1.0 - q1;
        t[[i, 1]] = q1;
    }
    t
}

/// Central-difference gradient of `loss` with respect to every parameter.
pub fn numerical_gradient<F>(params: &MlpParams, loss: F) -> Gradients
where
    F: Fn(&MlpParams) -> f64,
{
    let mut grads = params.zeros_like();
    for k in 0..params.layers.len() {
        let wdim = params.layers[k].weights.raw_dim();
        for idx in 0..wdim[0] * wdim[1] {
            let (r, c) = (idx / wdim[1], idx % wdim[1]);
            let mut plus = params.clone();
            plus.layers[k].weights[[r, c]] += GRAD_H;
            let mut minus = params.clone();
            minus.layers[k].weights[[r, c]] -= GRAD_H;
            grads.layers[k].weights[[r, c]] = (loss(&plus) - loss(&minus)) / (2.0 * GRAD_H);
        }
        for b in 0..params.layers[k].bias.len() {
            let mut plus = params.clone();
            plus.layers[k].bias[b] += GRAD_H;
            let mut minus = params.clone();
            minus.layers[k].bias[b] -= GRAD_H;
            grads.layers[k].bias[b] = (loss(&plus) - loss(&minus)) / (2.0 * GRAD_H);
        }
    }
    grads
}

/// Worst relative disagreement across all parameters, with an absolute
/// floor so near-zero components do not inflate the ratio.
pub fn max_rel_err(analytic: &Gradients, numeric: &Gradients) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, n) in analytic.layers.iter().zip(&numeric.layers) {
        for (&av, &nv) in a
            .weights
            .iter()
            .chain(a.bias.iter())
            .zip(n.weights.iter().chain(n.bias.iter()))
        {
            let rel = (av - nv).abs() / av.abs().max(nv.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    worst
}

/// Architectures cycled through by each check; paired with per-case seeds
/// this yields a spread of widths, depths, and batch sizes.
pub fn arch(case: usize) -> (usize, Vec<usize>, usize) {
    match case % 4 {
        0 => (3, vec![4], 6),
        1 => (5, vec![6, 4], 8),
        2 => (8, vec![8], 12),
        _ => (4, vec![5, 3], 5),
    }
}

/// Per-case worst relative error for the mean (possibly cost-weighted)
/// hard-label cross-entropy.
pub fn hard_label_case_errors(weights: &CostWeights, n_cases: usize, seed_base: u64) -> Vec<f64> {
    (0..n_cases)
        .map(|case| {
            let (dim, hidden, batch) = arch(case);
            let mut rng = ChaCha8Rng::seed_from_u64(seed_base + case as u64);
            let params = MlpParams::init(dim, &hidden, rng.random()).unwrap();
            let x = random_features(&mut rng, batch, dim);
            let labels = random_labels(&mut rng, batch);

            let pass = params.forward(&x).unwrap();
            let delta = hard_label_delta(&pass.probs, &labels, weights).unwrap();
            let analytic = params.backward_from_delta(&pass, &delta).unwrap();

            let numeric = numerical_gradient(&params, |p| {
                let probs = p.forward(&x).unwrap().probs;
                let per_sample = cs_loss_per_sample(&probs, &labels, weights).unwrap();
                per_sample.iter().sum::<f64>() / per_sample.len() as f64
            });
            max_rel_err(&analytic, &numeric)
        })
        .collect()
}

/// Per-case worst relative error for the combined semi-supervised objective
/// (weighted soft cross-entropy plus scaled unlabeled MSE).
pub fn semi_loss_case_errors(n_cases: usize, seed_base: u64) -> Vec<f64> {
    let weights = CostWeights::default();
    (0..n_cases)
        .map(|case| {
            let (dim, hidden, batch) = arch(case);
            let mut rng = ChaCha8Rng::seed_from_u64(seed_base + case as u64);
            let params = MlpParams::init(dim, &hidden, rng.random()).unwrap();
            let x_l = random_features(&mut rng, batch, dim);
            let q_l = random_soft_targets(&mut rng, batch);
            let n_u = batch.max(3) - 2;
            let x_u = random_features(&mut rng, n_u, dim);
            let q_u = random_soft_targets(&mut rng, n_u);
            let lambda = 0.5 + 24.5 * rng.random::<f64>();

            let pass_l = params.forward(&x_l).unwrap();
            let pass_u = params.forward(&x_u).unwrap();
            let mut analytic = params
                .backward_from_delta(
                    &pass_l,
                    &soft_ce_delta(&pass_l.probs, &q_l, &weights).unwrap(),
                )
                .unwrap();
            let delta_u = mse_output_delta(&pass_u.probs, &q_u).unwrap() * lambda;
            analytic
                .accumulate(&params.backward_from_delta(&pass_u, &delta_u).unwrap())
                .unwrap();

            let numeric = numerical_gradient(&params, |p| {
                let probs_l = p.forward(&x_l).unwrap().probs;
                let probs_u = p.forward(&x_u).unwrap().probs;
                semi_loss(&probs_l, &q_l, &probs_u, &q_u, lambda, &weights)
                    .unwrap()
                    .0
            });
            max_rel_err(&analytic, &numeric)
        })
        .collect()
}
