//! Sweep a method x noise x seed grid, persist the results as JSONL, and
//! reload them.
//!
//! Cells that share (noise, seed) also share their data and noise
//! realization, so cross-method comparisons are paired. Results are sorted
//! by config fingerprint, which makes sweep output independent of worker
//! count and scheduling.
//!
//! Run with: cargo run --example matrix_run

use noiserisk::harness::{
    canonical_bytes, load_results, persist_results, run_matrix, ExperimentConfig, MatrixSpec,
    Method,
};

fn main() -> noiserisk::Result<()> {
    let mut cfg = ExperimentConfig::synthetic_default(Method::Baseline);
    cfg.epochs = 30;
    cfg.matrix = Some(MatrixSpec {
        methods: vec![Method::Baseline, Method::CoTeaching],
        cost_sensitive: vec![false],
        noise_rates: vec![0.0, 0.4],
        seeds: vec![1, 2],
    });

    let results = run_matrix(&cfg, 2)?;
    println!("{} cells:", results.len());
    for r in &results {
        let bac = r
            .metrics
            .as_ref()
            .and_then(|m| m.bac)
            .map(|b| format!("{b:.3}"))
            .unwrap_or_else(|| "failed".into());
        println!(
            "  {:<12} eta={:.1} seed={} bac={} fingerprint={}",
            r.method.name(),
            r.noise_rate,
            r.seed,
            bac,
            &r.fingerprint[..12]
        );
    }

    let dir = std::path::Path::new("target/examples");
    std::fs::create_dir_all(dir)?;
    let path = dir.join("sweep.jsonl");
    persist_results(&results, &path)?;
    let reloaded = load_results(&path)?;
    println!("\nwrote and re-read {} ({} records)", path.display(), reloaded.len());

    // Identical content modulo wall-clock timing.
    assert_eq!(canonical_bytes(&results)?, canonical_bytes(&reloaded)?);
    println!("round-trip is byte-identical once timing is masked");

    // The same grid at a different worker count gives the same bytes.
    let wide = run_matrix(&cfg, 4)?;
    assert_eq!(canonical_bytes(&results)?, canonical_bytes(&wide)?);
    println!("parallelism does not change results");
    Ok(())
}
