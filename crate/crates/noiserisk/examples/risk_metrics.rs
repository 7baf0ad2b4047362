//! Evaluation metrics: confusion counts, balanced accuracy, tie-aware AUC,
//! cost-weighted risk, and the collapse detector.
//!
//! Run with: cargo run --example risk_metrics

use noiserisk::metrics::{
    auc, collapse_flag, risk_sweep, ConfusionCounts, MetricsRecord, RiskScenario,
};

fn main() -> noiserisk::Result<()> {
    // A screening model that misses 114 of 392 positives.
    let counts = ConfusionCounts::new(278, 204, 1409, 114);
    let scenarios = [
        RiskScenario::risk_i(),
        RiskScenario::risk_ii(),
        RiskScenario::new("triage", 10.0, 1.0)?,
    ];
    let record = MetricsRecord::from_counts(counts, &scenarios)?;
    println!(
        "sens {:.3}, spec {:.3}, bac {:.3}, f1 {:.3}",
        record.sensitivity.unwrap(),
        record.specificity.unwrap(),
        record.bac.unwrap(),
        record.f1.unwrap()
    );
    println!(
        "risk I {:.4} (errors equally costly), risk II {:.4} (misses cost 20x), \
         triage {:.4}",
        record.risk_i.unwrap(),
        record.risk_ii.unwrap(),
        record.extra_risks["risk_triage"].unwrap()
    );

    // The same error budget under a rising miss cost.
    println!("\ncost-ratio sweep (c_fp = 1):");
    for (lambda, value) in risk_sweep(&counts, &[1.0, 2.0, 5.0, 10.0, 20.0], 1.0) {
        println!("  c_fn {lambda:>5.1}: risk {:.4}", value.unwrap());
    }

    // AUC handles ties by mid-rank; a constant scorer lands at exactly 0.5.
    let labels = [1, 0, 1, 0, 1, 0];
    println!(
        "\nauc, informative scores: {:.3}",
        auc(&[0.9, 0.2, 0.8, 0.4, 0.6, 0.3], &labels)?.unwrap()
    );
    println!(
        "auc, constant scores:    {:.3}",
        auc(&[0.5; 6], &labels)?.unwrap()
    );

    // The collapse detector flags degenerate prediction in either direction.
    let all_positive = vec![1u8; 50];
    let (flag, ppr) = collapse_flag(&all_positive, 0.9)?;
    println!("\nall-positive predictor: ppr {ppr:.2}, flagged {flag}");
    let mixed: Vec<u8> = (0..50).map(|i| u8::from(i % 3 == 0)).collect();
    let (flag, ppr) = collapse_flag(&mixed, 0.9)?;
    println!("mixed predictor:        ppr {ppr:.2}, flagged {flag}");
    Ok(())
}
