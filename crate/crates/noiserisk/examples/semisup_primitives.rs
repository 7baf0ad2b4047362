//! The semi-supervised building blocks: augmentation, label guessing,
//! co-refinement, sharpening, and mixup.
//!
//! Run with: cargo run --example semisup_primitives

use ndarray::arr1;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use noiserisk::semisup::{
    augment, co_guess, co_refine, mixup, mixup_lambda, sharpen, SemiConfig, SoftLabel,
};

fn main() -> noiserisk::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    // Feature augmentation: additive Gaussian jitter, the tabular analogue
    // of the image augmentations used by co-divide methods.
    let row = arr1(&[1.0, -0.5, 2.0]);
    let view = augment(row.view(), 0.1, &mut rng)?;
    println!("augmented {:?} -> {:?}", row.to_vec(), view.to_vec());

    // Co-guessing: average predictions from several networks/views to get a
    // pseudo-label for an unlabeled sample.
    let guesses = [
        SoftLabel::new(0.3, 0.7)?,
        SoftLabel::new(0.4, 0.6)?,
        SoftLabel::new(0.2, 0.8)?,
    ];
    let guessed = co_guess(&guesses)?;
    println!("\nco-guess of three views: ({:.3}, {:.3})", guessed.q0, guessed.q1);

    // Sharpening pushes a guess toward one-hot without moving its argmax.
    let sharp = sharpen(guessed, 0.5)?;
    println!("sharpened at T=0.5:     ({:.3}, {:.3})", sharp.q0, sharp.q1);

    // Co-refinement blends the observed label with the model average,
    // weighted by how likely the sample is to be clean.
    for clean_posterior in [0.95, 0.5, 0.05] {
        let refined = co_refine(1, clean_posterior, SoftLabel::new(0.8, 0.2)?)?;
        println!(
            "refine observed=1 with w={clean_posterior:.2}: ({:.3}, {:.3})",
            refined.q0, refined.q1
        );
    }

    // Mixup with the max(lambda, 1-lambda) convention: the first argument
    // always dominates the blend.
    let draws: Vec<f64> = (0..6).map(|_| mixup_lambda(4.0, &mut rng).unwrap()).collect();
    println!(
        "\nmixup lambdas (alpha=4): {}",
        draws.iter().map(|l| format!("{l:.2}")).collect::<Vec<_>>().join(" ")
    );
    let (mixed_x, mixed_q) = mixup(
        (arr1(&[1.0, 0.0]).view(), SoftLabel::onehot(1)),
        (arr1(&[0.0, 1.0]).view(), SoftLabel::onehot(0)),
        4.0,
        &mut rng,
    )?;
    println!(
        "mixed features {:?}, mixed label ({:.3}, {:.3})",
        mixed_x.to_vec(),
        mixed_q.q0,
        mixed_q.q1
    );

    // The unlabeled-loss weight ramps linearly after warmup.
    let semi = SemiConfig::default();
    let ramp: Vec<String> = [0, 4, 8, 12, 16, 24]
        .iter()
        .map(|&e| format!("{e}:{:.1}", semi.lambda_at(e)))
        .collect();
    println!("\nlambda_u ramp (epoch:value): {}", ramp.join(" "));
    Ok(())
}
