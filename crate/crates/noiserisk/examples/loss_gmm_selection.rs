//! Separate clean from mislabeled samples by fitting a two-component
//! mixture to per-sample warmup losses.
//!
//! After a few epochs of plain cross-entropy, mislabeled samples sit in the
//! high-loss tail. A 1-D Gaussian mixture over normalized losses recovers
//! that structure; thresholding the clean-component posterior at 0.5 yields
//! a selection mask that can be scored against the true flip mask.
//!
//! Run with: cargo run --example loss_gmm_selection

use ndarray::Axis;
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use noiserisk::data::{generate_synthetic, inject_symmetric_noise, NoiseSpec, SyntheticSpec};
use noiserisk::nnet::{cs_loss_per_sample, CostWeights, MlpParams, OptimState};
use noiserisk::selection::{
    fit_gmm_em, gmm_select, normalize_losses, GmmOptions, SelectionQuality,
};

fn main() -> noiserisk::Result<()> {
    let (clean, _, _) = generate_synthetic(&SyntheticSpec::derma_preset())?;
    let train = inject_symmetric_noise(&clean, &NoiseSpec { rate: 0.3, seed: 5 })?;
    let flip_mask = train.flip_mask.clone().unwrap();

    // Warmup: plain CE on everything, long enough for losses to separate
    // but short of memorizing the noise.
    let warmup = 10;
    let mut params = MlpParams::init(train.feature_dim(), &[64, 64], 9)?;
    let mut opt = OptimState::new(&params, 0.9, 0.01, warmup)?;
    let weights = CostWeights::uniform();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut order: Vec<usize> = (0..train.n_samples()).collect();
    for epoch in 0..warmup {
        order.shuffle(&mut rng);
        for batch in order.chunks(64) {
            let x = train.features.select(Axis(0), batch);
            let y: Vec<u8> = batch.iter().map(|&i| train.observed_labels[i]).collect();
            let pass = params.forward(&x)?;
            let grads = params.backward(&pass, &y, &weights)?;
            opt.step(&mut params, &grads, epoch)?;
        }
    }

    // Per-sample losses over the full train split, min-max normalized.
    let pass = params.forward(&train.features)?;
    let losses = cs_loss_per_sample(&pass.probs, &train.observed_labels, &weights)?;
    let normed = normalize_losses(&losses)?;

    let gmm = fit_gmm_em(&normed, &GmmOptions::default())?;
    println!(
        "mixture: means ({:.3}, {:.3}), weights ({:.3}, {:.3}), {} EM iterations, converged {}",
        gmm.means.0, gmm.means.1, gmm.weights.0, gmm.weights.1, gmm.iterations, gmm.converged
    );
    println!(
        "clean-component mass {:.3} vs true clean fraction {:.3}",
        gmm.clean_mass(),
        1.0 - 0.3
    );

    let mask = gmm_select(&normed, &gmm, 0.5)?;
    let quality = SelectionQuality::score(&mask.selected, &flip_mask)?;
    println!(
        "\nselected {} of {} samples",
        mask.n_selected(),
        train.n_samples()
    );
    println!(
        "agreement with flip mask {:.3}, precision {:.3}, recall {:.3}",
        quality.agreement,
        quality.precision.unwrap(),
        quality.recall.unwrap()
    );
    Ok(())
}
