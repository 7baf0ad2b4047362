//! Train the from-scratch MLP with SGD momentum and a cosine schedule,
//! then checkpoint it to JSON and restore it bit-exactly.
//!
//! Run with: cargo run --example train_mlp

use ndarray::Axis;
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use noiserisk::data::{generate_synthetic, SyntheticSpec};
use noiserisk::metrics::{MetricsRecord, RiskScenario};
use noiserisk::nnet::{cs_loss_per_sample, CostWeights, MlpParams, OptimState};

fn main() -> noiserisk::Result<()> {
    let spec = SyntheticSpec {
        n_train: 800,
        n_val: 200,
        n_test: 800,
        class_separation: 4.0,
        ..SyntheticSpec::derma_preset()
    };
    let (train, _val, test) = generate_synthetic(&spec)?;

    let epochs = 30;
    let mut params = MlpParams::init(train.feature_dim(), &[32, 16], 42)?;
    let mut opt = OptimState::new(&params, 0.9, 0.05, epochs)?;
    let weights = CostWeights::uniform();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let mut order: Vec<usize> = (0..train.n_samples()).collect();
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(64) {
            let x = train.features.select(Axis(0), batch);
            let y: Vec<u8> = batch.iter().map(|&i| train.observed_labels[i]).collect();
            let pass = params.forward(&x)?;
            let losses = cs_loss_per_sample(&pass.probs, &y, &weights)?;
            loss_sum += losses.iter().sum::<f64>();
            let grads = params.backward(&pass, &y, &weights)?;
            opt.step(&mut params, &grads, epoch)?;
        }
        if epoch % 5 == 0 || epoch == epochs - 1 {
            println!(
                "epoch {epoch:>2}: loss {:.4}, lr {:.4}",
                loss_sum / train.n_samples() as f64,
                opt.lr_at(epoch)?
            );
        }
    }

    let predictions = params.predict(&test.features, 0.5)?;
    let scores = params.predict_proba(&test.features)?;
    let metrics = MetricsRecord::compute(
        &predictions,
        &test.observed_labels,
        &scores,
        &[RiskScenario::risk_i(), RiskScenario::risk_ii()],
    )?;
    println!(
        "\ntest: sens {:.3}, spec {:.3}, bac {:.3}, auc {:.3}",
        metrics.sensitivity.unwrap(),
        metrics.specificity.unwrap(),
        metrics.bac.unwrap(),
        metrics.auc.unwrap()
    );

    // Checkpoints round-trip f64 values exactly, so a restored model gives
    // identical scores.
    let checkpoint = params.to_json()?;
    let restored = MlpParams::from_json(&checkpoint)?;
    assert_eq!(restored.predict_proba(&test.features)?, scores);
    println!("checkpoint restored; scores are bit-identical");
    Ok(())
}
