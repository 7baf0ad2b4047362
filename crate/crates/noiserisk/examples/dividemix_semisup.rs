//! A full co-divide run: two networks, each trained on the division made
//! from its peer's losses, with mixup over labeled and guessed-unlabeled
//! samples.
//!
//! Run with: cargo run --example dividemix_semisup

use noiserisk::harness::{run_single, ExperimentConfig, Method};

fn main() -> noiserisk::Result<()> {
    let mut cfg = ExperimentConfig::synthetic_default(Method::Dividemix);
    cfg.noise_rate = 0.2;
    cfg.seed = 3;

    println!(
        "dividemix at eta={}, {} epochs ({} warmup), lambda_u={} over {} ramp epochs\n",
        cfg.noise_rate, cfg.epochs, cfg.warmup_epochs, cfg.semi.lambda_u, cfg.semi.ramp_epochs
    );

    let result = run_single(&cfg)?;

    println!("epoch  loss    labeled-frac  val-bac  agreement");
    for t in result
        .trace
        .iter()
        .filter(|t| t.epoch % 10 == 0 || t.epoch + 1 == cfg.epochs)
    {
        println!(
            "{:>5}  {:<7.4} {:<13.3} {:<8.3} {}",
            t.epoch,
            t.train_loss,
            t.selected_fraction,
            t.val_bac.unwrap_or(f64::NAN),
            t.selection_agreement
                .map(|a| format!("{a:.3}"))
                .unwrap_or_else(|| "warmup".into())
        );
    }

    let m = result.metrics.as_ref().unwrap();
    let stats = result.selection_stats.as_ref().unwrap();
    println!(
        "\ntest: sens {:.3}, spec {:.3}, bac {:.3}, auc {:.3}, risk II {:.4}",
        m.sensitivity.unwrap(),
        m.specificity.unwrap(),
        m.bac.unwrap(),
        m.auc.unwrap(),
        m.risk_ii.unwrap()
    );
    println!(
        "division quality: final agreement {:.3}, precision {:.3}, recall {:.3}",
        stats.final_agreement,
        stats.final_precision.unwrap(),
        stats.final_recall.unwrap()
    );
    Ok(())
}
