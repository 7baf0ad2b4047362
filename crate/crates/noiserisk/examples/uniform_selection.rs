//! Why class-uniform selection exists: posterior thresholding alone can
//! filter the minority class out entirely.
//!
//! At high noise most observed positives are wrong, so their losses are
//! high and their clean posteriors low. A global threshold then keeps
//! almost no positives, and whatever trains on the selection never sees
//! the minority class again. Selecting the top samples per class keeps
//! both classes represented at the cost of admitting some noise.
//!
//! Run with: cargo run --example uniform_selection

use noiserisk::data::{generate_synthetic, inject_symmetric_noise, NoiseSpec, SyntheticSpec};
use noiserisk::selection::{clean_posterior, fit_gmm_em, normalize_losses, GmmOptions};
use noiserisk::selection::{gmm_select, uniform_class_select};

fn main() -> noiserisk::Result<()> {
    let (clean, _, _) = generate_synthetic(&SyntheticSpec::derma_preset())?;
    let train = inject_symmetric_noise(&clean, &NoiseSpec { rate: 0.4, seed: 2 })?;

    // Surrogate warmup losses: clean samples low, flipped samples high,
    // with overlap. This isolates the selection behavior from training.
    let flip_mask = train.flip_mask.as_ref().unwrap();
    let losses: Vec<f64> = flip_mask
        .iter()
        .enumerate()
        .map(|(i, &flipped)| {
            let jitter = (i % 97) as f64 / 97.0 * 0.35;
            if flipped {
                0.55 + jitter
            } else {
                0.05 + jitter
            }
        })
        .collect();
    let normed = normalize_losses(&losses)?;
    let gmm = fit_gmm_em(&normed, &GmmOptions::default())?;
    let posteriors: Vec<f64> = normed.iter().map(|&l| clean_posterior(l, &gmm)).collect();

    let count_positives = |selected: &[bool]| {
        selected
            .iter()
            .zip(&train.observed_labels)
            .filter(|(&s, &y)| s && y == 1)
            .count()
    };
    let observed_positives = train.observed_labels.iter().filter(|&&y| y == 1).count();

    // Global thresholding at 0.5.
    let global = gmm_select(&normed, &gmm, 0.5)?;
    println!(
        "global threshold: {} selected, {} of {} observed positives kept",
        global.n_selected(),
        count_positives(&global.selected),
        observed_positives
    );

    // Class-uniform selection with the mixture's clean mass as the budget.
    let budget = gmm.clean_mass().min(1.0);
    let (uniform, stats) = uniform_class_select(&posteriors, &train.observed_labels, budget)?;
    println!(
        "uniform selection: {} selected, {} observed positives kept",
        uniform.n_selected(),
        count_positives(&uniform.selected)
    );
    println!(
        "  per-class budget {} -> took {} negatives, {} positives (capped: {:?})",
        stats.per_class_budget, stats.taken[0], stats.taken[1], stats.capped
    );
    Ok(())
}
