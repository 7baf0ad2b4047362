//! Report emitters: the method comparison table, the accuracy/risk
//! trade-off data, and the per-noise impact report.
//!
//! All three consume persisted [`RunResult`]s, aggregate by cell (mean over
//! seeds), and render undefined values as `n/a` rather than inventing
//! zeros.

use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::config::Method;
use super::run::RunResult;

/// Metric positions within one noise-rate column group.
const GROUP_METRICS: [&str; 7] = ["Sens", "Spec", "BAC", "AUC", "F1", "Risk I", "Risk II"];
/// Risks are better low; everything else is better high.
const METRIC_HIGHER_IS_BETTER: [bool; 7] = [true, true, true, true, true, false, false];

/// Mean of the defined values, or `None` when nothing is defined.
fn mean_defined(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

fn fmt3(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.3}"),
        None => "n/a".into(),
    }
}

fn fmt4(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.4}"),
        None => "n/a".into(),
    }
}

/// Mean count rendered as an integer when whole.
fn fmt_count(value: f64) -> String {
    if (value - value.round()).abs() < 1e-9 {
        format!("{:.0}", value.round())
    } else {
        format!("{value:.1}")
    }
}

fn method_order(method: Method) -> usize {
    Method::ALL.iter().position(|&m| m == method).unwrap_or(0)
}

/// Sorted, deduplicated noise rates across the results.
fn noise_axis(results: &[RunResult]) -> Vec<f64> {
    let mut rates: Vec<f64> = results.iter().map(|r| r.noise_rate).collect();
    rates.sort_by(|a, b| a.total_cmp(b));
    rates.dedup();
    rates
}

/// The seven per-group metric means for one (method, cs, noise) cell.
fn cell_metrics(runs: &[&RunResult]) -> [Option<f64>; 7] {
    let pick = |f: &dyn Fn(&RunResult) -> Option<f64>| {
        mean_defined(&runs.iter().map(|r| f(r)).collect::<Vec<_>>())
    };
    [
        pick(&|r| r.metrics.as_ref().and_then(|m| m.sensitivity)),
        pick(&|r| r.metrics.as_ref().and_then(|m| m.specificity)),
        pick(&|r| r.metrics.as_ref().and_then(|m| m.bac)),
        pick(&|r| r.metrics.as_ref().and_then(|m| m.auc)),
        pick(&|r| r.metrics.as_ref().and_then(|m| m.f1)),
        pick(&|r| r.metrics.as_ref().and_then(|m| m.risk_i)),
        pick(&|r| r.metrics.as_ref().and_then(|m| m.risk_ii)),
    ]
}

/// Text table comparing methods (rows, ± cost-sensitive) across noise rates
/// (column groups of Sens/Spec/BAC/AUC/F1/Risk I/Risk II, mean over seeds,
/// 3 decimals). With two or more rows the best value per column gets a `*`
/// (max for quality metrics, min for risks; ties all marked, judged on the
/// rounded display values). All results must come from one dataset.
pub fn emit_method_table(results: &[RunResult]) -> Result<String> {
    if results.is_empty() {
        return Err(Error::Report("no results to tabulate".into()));
    }
    let data_fp = &results[0].data_fingerprint;
    if results.iter().any(|r| &r.data_fingerprint != data_fp) {
        return Err(Error::Report(
            "results mix different datasets; tabulate one dataset at a time".into(),
        ));
    }

    let noises = noise_axis(results);
    let mut row_keys: Vec<(Method, bool)> = results
        .iter()
        .map(|r| (r.method, r.cost_sensitive))
        .collect();
    row_keys.sort_by_key(|&(m, cs)| (method_order(m), cs));
    row_keys.dedup();

    // cells[row][group][metric]
    let mut cells: Vec<Vec<[Option<f64>; 7]>> = Vec::with_capacity(row_keys.len());
    for &(method, cs) in &row_keys {
        let mut groups = Vec::with_capacity(noises.len());
        for &noise in &noises {
            let runs: Vec<&RunResult> = results
                .iter()
                .filter(|r| {
                    r.method == method && r.cost_sensitive == cs && r.noise_rate == noise
                })
                .collect();
            groups.push(cell_metrics(&runs));
        }
        cells.push(groups);
    }

    // Best display value per (group, metric) column, judged on the value
    // rounded for display so visually equal cells tie. Only worth marking
    // when there is something to compare against.
    let round3 = |v: f64| (v * 1000.0).round() / 1000.0;
    let mark_best = row_keys.len() >= 2;
    let mut best: Vec<[Option<f64>; 7]> = vec![[None; 7]; noises.len()];
    if mark_best {
        for (g, best_group) in best.iter_mut().enumerate() {
            for m in 0..7 {
                let candidates = cells.iter().filter_map(|row| row[g][m]).map(round3);
                best_group[m] = if METRIC_HIGHER_IS_BETTER[m] {
                    candidates.reduce(f64::max)
                } else {
                    candidates.reduce(f64::min)
                };
            }
        }
    }

    let mut out = String::new();
    writeln!(
        out,
        "Method comparison (mean over seeds; per-noise columns: {})",
        GROUP_METRICS.join(" / ")
    )
    .unwrap();
    if mark_best {
        writeln!(
            out,
            "* marks the best value per column (highest, or lowest for risks)."
        )
        .unwrap();
    }
    writeln!(out).unwrap();

    let label_width = 14;
    let mut header = format!("{:<label_width$}{:<5}", "method", "cs");
    for &noise in &noises {
        header.push_str(&format!("| eta={noise:.2}  "));
    }
    writeln!(out, "{header}").unwrap();

    for (i, &(method, cs)) in row_keys.iter().enumerate() {
        let mut line = format!(
            "{:<label_width$}{:<5}",
            method.name(),
            if cs { "yes" } else { "no" }
        );
        for (g, group) in cells[i].iter().enumerate() {
            let rendered: Vec<String> = group
                .iter()
                .enumerate()
                .map(|(m, &v)| {
                    let s = fmt3(v);
                    let is_best = matches!((v, best[g][m]), (Some(v), Some(b)) if round3(v) == b);
                    if mark_best && is_best {
                        format!("{s}*")
                    } else {
                        s
                    }
                })
                .collect();
            line.push_str(&format!("| {} ", rendered.join(" / ")));
        }
        writeln!(out, "{line}").unwrap();
    }
    Ok(out)
}

/// CSV plus optional SVG scatter of the accuracy/risk trade-off under one
/// risk scenario.
#[derive(Debug, Clone)]
pub struct TradeoffData {
    /// Columns: method, cs, noise, bac, risk, collapse_flag. One row per
    /// (method, cs, noise) cell; undefined values are empty fields.
    pub csv: String,
    /// Scatter with risk horizontal and balanced accuracy vertical, so the
    /// ideal operating region is the top-left corner. `None` when no cell
    /// has both values defined.
    pub svg: Option<String>,
    /// Set when the SVG is omitted, saying why.
    pub notice: Option<String>,
}

/// The per-run risk value for a named scenario.
fn scenario_risk(result: &RunResult, scenario: &str) -> Option<f64> {
    let metrics = result.metrics.as_ref()?;
    match scenario {
        "risk_I" => metrics.risk_i,
        "risk_II" => metrics.risk_ii,
        other => metrics
            .extra_risks
            .get(&format!("risk_{other}"))
            .copied()
            .flatten(),
    }
}

/// Aggregate (method, cs, noise) cells and emit the trade-off CSV and SVG.
pub fn emit_tradeoff_data(results: &[RunResult], scenario: &str) -> Result<TradeoffData> {
    if results.is_empty() {
        return Err(Error::Report("no results to plot".into()));
    }

    struct Point {
        method: Method,
        cs: bool,
        noise: f64,
        bac: Option<f64>,
        risk: Option<f64>,
        collapse: bool,
    }

    let mut keys: Vec<(Method, bool, f64)> = results
        .iter()
        .map(|r| (r.method, r.cost_sensitive, r.noise_rate))
        .collect();
    keys.sort_by(|a, b| {
        (method_order(a.0), a.1)
            .cmp(&(method_order(b.0), b.1))
            .then(a.2.total_cmp(&b.2))
    });
    keys.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1 && a.2 == b.2);

    let mut points = Vec::with_capacity(keys.len());
    for (method, cs, noise) in keys {
        let runs: Vec<&RunResult> = results
            .iter()
            .filter(|r| r.method == method && r.cost_sensitive == cs && r.noise_rate == noise)
            .collect();
        points.push(Point {
            method,
            cs,
            noise,
            bac: mean_defined(
                &runs
                    .iter()
                    .map(|r| r.metrics.as_ref().and_then(|m| m.bac))
                    .collect::<Vec<_>>(),
            ),
            risk: mean_defined(
                &runs
                    .iter()
                    .map(|r| scenario_risk(r, scenario))
                    .collect::<Vec<_>>(),
            ),
            collapse: runs.iter().any(|r| r.collapse),
        });
    }

    let mut csv = String::from("method,cs,noise,bac,risk,collapse_flag\n");
    for p in &points {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            p.method.name(),
            p.cs,
            p.noise,
            fmt(p.bac),
            fmt(p.risk),
            p.collapse
        )
        .unwrap();
    }

    let markers: Vec<&Point> = points
        .iter()
        .filter(|p| p.bac.is_some() && p.risk.is_some())
        .collect();
    if markers.is_empty() {
        return Ok(TradeoffData {
            csv,
            svg: None,
            notice: Some(format!(
                "no cell has both balanced accuracy and {scenario} defined; scatter omitted"
            )),
        });
    }

    let xs: Vec<f64> = markers.iter().map(|p| p.risk.unwrap()).collect();
    let ys: Vec<f64> = markers.iter().map(|p| p.bac.unwrap()).collect();
    let svg = scatter_svg(
        &xs,
        &ys,
        &markers
            .iter()
            .map(|p| {
                format!(
                    "{}{} eta={:.2}{}",
                    p.method.name(),
                    if p.cs { "+cs" } else { "" },
                    p.noise,
                    if p.collapse { " (collapse)" } else { "" }
                )
            })
            .collect::<Vec<_>>(),
        &format!("risk ({scenario})"),
        "balanced accuracy",
    );
    Ok(TradeoffData {
        csv,
        svg: Some(svg),
        notice: None,
    })
}

/// Minimal standalone scatter plot. Low x is left and high y is top, which
/// puts the ideal low-risk / high-accuracy region top-left.
fn scatter_svg(xs: &[f64], ys: &[f64], labels: &[String], x_title: &str, y_title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 30.0;
    const B: f64 = 55.0;

    let pad_range = |min: f64, max: f64| {
        if (max - min).abs() < 1e-12 {
            let pad = (min.abs() * 0.1).max(0.1);
            (min - pad, max + pad)
        } else {
            let pad = (max - min) * 0.08;
            (min - pad, max + pad)
        }
    };
    let (x0, x1) = pad_range(
        xs.iter().copied().fold(f64::INFINITY, f64::min),
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = pad_range(
        ys.iter().copied().fold(f64::INFINITY, f64::min),
        ys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let sx = |v: f64| L + (v - x0) / (x1 - x0) * (W - L - R);
    let sy = |v: f64| H - B - (v - y0) / (y1 - y0) * (H - T - B);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<rect width="{W}" height="{H}" fill="white"/>"#
    )
    .unwrap();
    // Axes.
    writeln!(
        svg,
        r#"<line x1="{L}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        H - B,
        W - R,
        H - B
    )
    .unwrap();
    writeln!(
        svg,
        r#"<line x1="{L}" y1="{T}" x2="{L}" y2="{}" stroke="black"/>"#,
        H - B
    )
    .unwrap();
    // Ticks and labels.
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let px = sx(fx);
        let py = sy(fy);
        writeln!(
            svg,
            r#"<line x1="{px}" y1="{}" x2="{px}" y2="{}" stroke="black"/><text x="{px}" y="{}" font-size="11" text-anchor="middle">{fx:.3}</text>"#,
            H - B,
            H - B + 5.0,
            H - B + 18.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<line x1="{}" y1="{py}" x2="{L}" y2="{py}" stroke="black"/><text x="{}" y="{}" font-size="11" text-anchor="end">{fy:.3}</text>"#,
            L - 5.0,
            L - 8.0,
            py + 4.0
        )
        .unwrap();
    }
    // Axis titles and the orientation hint.
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{x_title}</text>"#,
        (L + W - R) / 2.0,
        H - 12.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{y_title}</text>"#,
        (T + H - B) / 2.0,
        (T + H - B) / 2.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" fill="gray">ideal region</text>"#,
        L + 6.0,
        T + 12.0
    )
    .unwrap();
    // Markers.
    for ((&x, &y), label) in xs.iter().zip(ys).zip(labels) {
        let px = sx(x);
        let py = sy(y);
        writeln!(
            svg,
            r#"<circle cx="{px}" cy="{py}" r="4" fill="steelblue"/><text x="{}" y="{}" font-size="10">{label}</text>"#,
            px + 6.0,
            py - 6.0
        )
        .unwrap();
    }
    writeln!(svg, "</svg>").unwrap();
    svg
}

/// Per-noise error decomposition for one method.
#[derive(Debug, Clone)]
pub struct NoiseImpactReport {
    /// Human-readable table plus any annotations.
    pub text: String,
    /// Columns: noise, cs, fn, fp, risk_I, risk_II, collapse.
    pub csv: String,
    /// One entry per row where Risk II fell from the previous row while the
    /// collapse flag is set.
    pub annotations: Vec<String>,
}

/// Tabulate false negatives, false positives, and risks per noise rate for
/// a single method, and annotate rows where a flagged collapse coincides
/// with a Risk II drop: extra false positives are cheap under an
/// FN-dominated cost ratio, so a collapsed model can look safer than a
/// balanced one while making more errors overall.
pub fn emit_noise_impact_report(results: &[RunResult]) -> Result<NoiseImpactReport> {
    if results.is_empty() {
        return Err(Error::Report("no results to report".into()));
    }
    let method = results[0].method;
    if results.iter().any(|r| r.method != method) {
        return Err(Error::Report(
            "noise impact report covers exactly one method; got a mix".into(),
        ));
    }
    let noises = noise_axis(results);
    if noises.len() < 2 {
        return Err(Error::Report(
            "noise impact report needs at least two noise rates".into(),
        ));
    }

    struct Row {
        noise: f64,
        cs: bool,
        fn_mean: f64,
        fp_mean: f64,
        risk_i: Option<f64>,
        risk_ii: Option<f64>,
        collapse: bool,
    }

    let mut keys: Vec<(f64, bool)> = results
        .iter()
        .map(|r| (r.noise_rate, r.cost_sensitive))
        .collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keys.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    let mut rows = Vec::with_capacity(keys.len());
    for (noise, cs) in keys {
        let runs: Vec<&RunResult> = results
            .iter()
            .filter(|r| r.noise_rate == noise && r.cost_sensitive == cs)
            .collect();
        let with_metrics: Vec<&RunResult> =
            runs.iter().copied().filter(|r| r.metrics.is_some()).collect();
        if with_metrics.is_empty() {
            return Err(Error::Report(format!(
                "no successful runs at noise {noise} (cs={cs})"
            )));
        }
        let k = with_metrics.len() as f64;
        let mean_count = |f: &dyn Fn(&RunResult) -> u64| {
            with_metrics.iter().map(|r| f(r) as f64).sum::<f64>() / k
        };
        rows.push(Row {
            noise,
            cs,
            fn_mean: mean_count(&|r| r.metrics.as_ref().unwrap().fn_count),
            fp_mean: mean_count(&|r| r.metrics.as_ref().unwrap().fp),
            risk_i: mean_defined(
                &with_metrics
                    .iter()
                    .map(|r| r.metrics.as_ref().unwrap().risk_i)
                    .collect::<Vec<_>>(),
            ),
            risk_ii: mean_defined(
                &with_metrics
                    .iter()
                    .map(|r| r.metrics.as_ref().unwrap().risk_ii)
                    .collect::<Vec<_>>(),
            ),
            collapse: with_metrics.iter().any(|r| r.collapse),
        });
    }

    let mut annotations = Vec::new();
    for i in 1..rows.len() {
        let (prev, cur) = (&rows[i - 1], &rows[i]);
        if let (Some(prev_risk), Some(cur_risk)) = (prev.risk_ii, cur.risk_ii) {
            if cur.collapse && cur_risk < prev_risk {
                let prev_err = prev.fn_mean + prev.fp_mean;
                let cur_err = cur.fn_mean + cur.fp_mean;
                let error_note = if cur_err > prev_err {
                    format!(
                        " while total errors rose from {} to {}",
                        fmt_count(prev_err),
                        fmt_count(cur_err)
                    )
                } else {
                    String::new()
                };
                annotations.push(format!(
                    "noise {:.2} (cs={}): Risk II fell from {:.4} to {:.4} with the collapse \
                     flag set{error_note}; trading misses for false alarms under an \
                     FN-weighted cost artificially lowers Risk II",
                    cur.noise, cur.cs, prev_risk, cur_risk
                ));
            }
        }
    }

    let mut text = String::new();
    writeln!(text, "Noise impact: method = {}", method.name()).unwrap();
    writeln!(
        text,
        "{:<8}{:<5}{:>9}{:>9}{:>10}{:>10}  collapse",
        "noise", "cs", "FN", "FP", "Risk I", "Risk II"
    )
    .unwrap();
    for row in &rows {
        writeln!(
            text,
            "{:<8.2}{:<5}{:>9}{:>9}{:>10}{:>10}  {}",
            row.noise,
            if row.cs { "yes" } else { "no" },
            fmt_count(row.fn_mean),
            fmt_count(row.fp_mean),
            fmt4(row.risk_i),
            fmt4(row.risk_ii),
            if row.collapse { "yes" } else { "no" }
        )
        .unwrap();
    }
    for note in &annotations {
        writeln!(text, "! {note}").unwrap();
    }

    let mut csv = String::from("noise,cs,fn,fp,risk_I,risk_II,collapse\n");
    for row in &rows {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            row.noise,
            row.cs,
            row.fn_mean,
            row.fp_mean,
            fmt(row.risk_i),
            fmt(row.risk_ii),
            row.collapse
        )
        .unwrap();
    }

    Ok(NoiseImpactReport {
        text,
        csv,
        annotations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;
    use crate::harness::run::{RunResult, SCHEMA_VERSION};
    use crate::metrics::{ConfusionCounts, MetricsRecord, RiskScenario};

    /// Hand-built result carrying just what the emitters read.
    fn result_with_counts(
        method: Method,
        cs: bool,
        noise: f64,
        seed: u64,
        counts: ConfusionCounts,
        collapse: bool,
    ) -> RunResult {
        let mut config = ExperimentConfig::synthetic_default(method);
        config.cost_sensitive = cs;
        config.noise_rate = noise;
        config.seed = seed;
        let scenarios = [RiskScenario::risk_i(), RiskScenario::risk_ii()];
        let metrics = MetricsRecord::from_counts(counts, &scenarios).unwrap();
        RunResult {
            schema_version: SCHEMA_VERSION,
            fingerprint: config.fingerprint(),
            data_fingerprint: config.data_fingerprint(),
            method,
            cost_sensitive: cs,
            noise_rate: noise,
            seed,
            config,
            trace: Vec::new(),
            metrics: Some(metrics),
            collapse,
            wall_clock_secs: 0.0,
            selection_stats: None,
            error: None,
        }
    }

    /// A dermatology-scale error decomposition: 392 positives, 1613
    /// negatives; balanced model (FN=114, FP=204) vs collapsed model
    /// (FN=59, FP=910).
    fn balanced_counts() -> ConfusionCounts {
        ConfusionCounts::new(392 - 114, 204, 1613 - 204, 114)
    }

    fn collapsed_counts() -> ConfusionCounts {
        ConfusionCounts::new(392 - 59, 910, 1613 - 910, 59)
    }

    #[test]
    fn method_table_renders_three_decimal_row() {
        let result = result_with_counts(
            Method::Baseline,
            false,
            0.0,
            1,
            balanced_counts(),
            false,
        );
        let table = emit_method_table(&[result]).unwrap();
        // sens = 278/392 = 0.709, spec = 1409/1613 = 0.874, bac = 0.791.
        assert!(
            table.contains("0.709 / 0.874 / 0.791"),
            "table was:\n{table}"
        );
        // Single row: no best markers.
        assert!(!table.contains('*'), "table was:\n{table}");
    }

    #[test]
    fn method_table_means_over_seeds_and_marks_best() {
        // Two methods, one with per-seed BACs straddling the other.
        let a1 = result_with_counts(
            Method::Baseline,
            false,
            0.0,
            1,
            ConfusionCounts::new(80, 20, 80, 20),
            false,
        );
        let a2 = result_with_counts(
            Method::Baseline,
            false,
            0.0,
            2,
            ConfusionCounts::new(90, 10, 90, 10),
            false,
        );
        let b = result_with_counts(
            Method::CoTeaching,
            false,
            0.0,
            1,
            ConfusionCounts::new(95, 5, 95, 5),
            false,
        );
        let table = emit_method_table(&[a1, a2, b]).unwrap();
        // Baseline mean sens = (0.8 + 0.9) / 2 = 0.850; co_teaching 0.950*.
        assert!(table.contains("0.850"), "table was:\n{table}");
        assert!(table.contains("0.950*"), "table was:\n{table}");
    }

    #[test]
    fn method_table_marks_all_on_ties() {
        let a = result_with_counts(
            Method::Baseline,
            false,
            0.0,
            1,
            ConfusionCounts::new(90, 10, 90, 10),
            false,
        );
        let b = result_with_counts(
            Method::GmmFilter,
            false,
            0.0,
            1,
            ConfusionCounts::new(90, 10, 90, 10),
            false,
        );
        let table = emit_method_table(&[a, b]).unwrap();
        let starred = table.matches("0.900*").count();
        // sens = spec = bac = f1 = 0.900 in both rows: all eight marked.
        assert_eq!(starred, 8, "table was:\n{table}");
    }

    #[test]
    fn method_table_rejects_mixed_datasets() {
        let a = result_with_counts(Method::Baseline, false, 0.0, 1, balanced_counts(), false);
        let mut b = result_with_counts(Method::Baseline, false, 0.2, 1, balanced_counts(), false);
        b.data_fingerprint = "different".into();
        assert!(emit_method_table(&[a, b]).is_err());
    }

    #[test]
    fn tradeoff_counts_cells_and_handles_undefined_risk() {
        let mut results = Vec::new();
        for (method, noise) in [
            (Method::Baseline, 0.0),
            (Method::Baseline, 0.2),
            (Method::Unicon, 0.0),
        ] {
            for seed in [1, 2] {
                results.push(result_with_counts(
                    method,
                    false,
                    noise,
                    seed,
                    balanced_counts(),
                    false,
                ));
            }
        }
        let data = emit_tradeoff_data(&results, "risk_II").unwrap();
        assert_eq!(data.csv.lines().count(), 1 + 3, "csv was:\n{}", data.csv);
        let svg = data.svg.expect("svg present");
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(data.notice.is_none());

        // A scenario nobody computed: CSV still emitted, SVG omitted.
        let missing = emit_tradeoff_data(&results, "nonexistent").unwrap();
        assert_eq!(missing.csv.lines().count(), 1 + 3);
        assert!(missing.svg.is_none());
        assert!(missing.notice.is_some());
    }

    #[test]
    fn tradeoff_single_point_has_one_marker() {
        let r = result_with_counts(Method::Baseline, false, 0.0, 1, balanced_counts(), false);
        let data = emit_tradeoff_data(&[r], "risk_II").unwrap();
        assert_eq!(data.svg.unwrap().matches("<circle").count(), 1);
    }

    #[test]
    fn noise_impact_decomposes_risks_and_annotates_collapse() {
        // Two-row decomposition: balanced at noise 0, collapsed at 0.2.
        // The collapse flag on the second row comes from the record itself,
        // even though its raw positive rate alone is below 0.9.
        let balanced =
            result_with_counts(Method::Baseline, false, 0.0, 1, balanced_counts(), false);
        let collapsed =
            result_with_counts(Method::Baseline, false, 0.2, 1, collapsed_counts(), true);
        let report = emit_noise_impact_report(&[balanced, collapsed]).unwrap();

        assert!(report.text.contains("1.2389"), "text:\n{}", report.text);
        assert!(report.text.contains("1.0424"), "text:\n{}", report.text);
        assert!(report.text.contains("0.1586"), "text:\n{}", report.text);
        assert_eq!(report.annotations.len(), 1, "text:\n{}", report.text);
        assert!(report.annotations[0].contains("Risk II fell"));
        assert!(report.annotations[0].contains("collapse"));
        // 318 total errors vs 969.
        assert!(report.annotations[0].contains("318"));
        assert!(report.annotations[0].contains("969"));
    }

    #[test]
    fn noise_impact_requires_two_rates_and_one_method() {
        let a = result_with_counts(Method::Baseline, false, 0.2, 1, balanced_counts(), false);
        assert!(emit_noise_impact_report(std::slice::from_ref(&a)).is_err());

        let b = result_with_counts(Method::Unicon, false, 0.4, 1, balanced_counts(), false);
        assert!(emit_noise_impact_report(&[a, b]).is_err());
    }

    #[test]
    fn noise_impact_zero_errors_zero_risks() {
        let a = result_with_counts(
            Method::Baseline,
            false,
            0.0,
            1,
            ConfusionCounts::new(100, 0, 100, 0),
            false,
        );
        let b = result_with_counts(
            Method::Baseline,
            false,
            0.2,
            1,
            ConfusionCounts::new(100, 0, 100, 0),
            false,
        );
        let report = emit_noise_impact_report(&[a, b]).unwrap();
        assert_eq!(report.csv.matches("0.000000,0.000000").count(), 2);
        assert!(report.annotations.is_empty());
    }
}
