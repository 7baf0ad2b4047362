//! Turn sweep results into a method table, a BAC-vs-risk trade-off plot,
//! and a noise-impact report with collapse annotations.
//!
//! The grid below uses an extreme miss cost (w1 = 100) on a tiny dataset so
//! that the half-noise weighted cell collapses to all-positive prediction.
//! That is exactly the regime the noise-impact report is built to call out:
//! Risk II falls while total errors rise.
//!
//! Run with: cargo run --example reports

use noiserisk::data::SyntheticSpec;
use noiserisk::harness::{
    emit_method_table, emit_noise_impact_report, emit_tradeoff_data, run_matrix, DataConfig,
    ExperimentConfig, MatrixSpec, Method,
};
use noiserisk::nnet::CostWeights;

fn main() -> noiserisk::Result<()> {
    let tiny = SyntheticSpec {
        n_train: 200,
        n_val: 100,
        n_test: 400,
        ..SyntheticSpec::derma_preset()
    };
    let mut cfg = ExperimentConfig::synthetic_default(Method::Baseline);
    cfg.data = DataConfig::synthetic(tiny);
    cfg.epochs = 30;
    cfg.warmup_epochs = 5;
    cfg.weights = CostWeights::new(1.0, 100.0)?;
    cfg.matrix = Some(MatrixSpec {
        methods: vec![Method::Baseline, Method::CoTeaching],
        cost_sensitive: vec![false, true],
        noise_rates: vec![0.0, 0.5],
        seeds: vec![1],
    });
    let results = run_matrix(&cfg, 2)?;

    // Per-method metric table; '*' marks the best value in each column.
    println!("{}", emit_method_table(&results)?);

    // Trade-off data: one CSV row per cell, plus an SVG scatter of BAC
    // against Risk II where the ideal region is the top-left corner.
    let tradeoff = emit_tradeoff_data(&results, "risk_II")?;
    let dir = std::path::Path::new("target/examples");
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("tradeoff.csv"), &tradeoff.csv)?;
    if let Some(svg) = &tradeoff.svg {
        std::fs::write(dir.join("tradeoff.svg"), svg)?;
        println!("wrote {} and tradeoff.svg\n", dir.join("tradeoff.csv").display());
    }

    // Noise impact for a single method: false negatives, false positives,
    // and risks per (noise, cs) row, with annotations where a collapse
    // makes Risk II fall.
    let baseline_only: Vec<_> = results
        .iter()
        .filter(|r| r.method == Method::Baseline)
        .cloned()
        .collect();
    let report = emit_noise_impact_report(&baseline_only)?;
    println!("{}", report.text);
    for note in &report.annotations {
        println!("annotation: {note}");
    }
    Ok(())
}
