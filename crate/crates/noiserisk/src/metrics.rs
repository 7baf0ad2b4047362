//! Confusion-matrix statistics, ranking metrics, and cost-weighted risk.
//!
//! Class 1 is the positive (malignant) class throughout. Metrics with a zero
//! denominator return `None` rather than a silent zero; reports render these
//! as `n/a`. Risk numerators are exact in f64 whenever costs and counts are
//! integers below 2^53, so golden values are bit-stable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2x2 tally on a clean evaluation split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tpc: u64,
    pub fpc: u64,
    pub tnc: u64,
    pub fnc: u64,
}

impl ConfusionCounts {
    pub fn new(tpc: u64, fpc: u64, tnc: u64, fnc: u64) -> Self {
        Self { tpc, fpc, tnc, fnc }
    }

    /// Tally predictions against labels. Entries must be 0 or 1.
    pub fn from_predictions(predictions: &[u8], labels: &[u8]) -> Result<Self> {
        if predictions.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} predictions vs {} labels",
                predictions.len(),
                labels.len()
            )));
        }
        let mut c = Self::new(0, 0, 0, 0);
        for (i, (&p, &y)) in predictions.iter().zip(labels).enumerate() {
            match (p, y) {
                (1, 1) => c.tpc += 1,
                (1, 0) => c.fpc += 1,
                (0, 0) => c.tnc += 1,
                (0, 1) => c.fnc += 1,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "non-binary value at index {i}: prediction {p}, label {y}"
                    )))
                }
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tpc + self.fpc + self.tnc + self.fnc
    }

    /// TP / (TP + FN); `None` when no positives exist.
    pub fn sensitivity(&self) -> Option<f64> {
        match self.tpc + self.fnc {
            0 => None,
            d => Some(self.tpc as f64 / d as f64),
        }
    }

    /// TN / (TN + FP); `None` when no negatives exist.
    pub fn specificity(&self) -> Option<f64> {
        match self.tnc + self.fpc {
            0 => None,
            d => Some(self.tnc as f64 / d as f64),
        }
    }

    /// Balanced accuracy: arithmetic mean of sensitivity and specificity.
    pub fn bac(&self) -> Option<f64> {
        Some((self.sensitivity()? + self.specificity()?) / 2.0)
    }

    /// 2 TP / (2 TP + FP + FN); `None` when that denominator is zero.
    pub fn f1(&self) -> Option<f64> {
        match 2 * self.tpc + self.fpc + self.fnc {
            0 => None,
            d => Some(2.0 * self.tpc as f64 / d as f64),
        }
    }
}

/// A (C_FN, C_FP) cost pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskScenario {
    pub name: String,
    pub c_fn: f64,
    pub c_fp: f64,
}

impl RiskScenario {
    pub fn new(name: impl Into<String>, c_fn: f64, c_fp: f64) -> Result<Self> {
        if !(c_fn >= 0.0 && c_fp >= 0.0) {
            return Err(Error::InvalidParameter(
                "risk costs must be non-negative".into(),
            ));
        }
        if c_fn == 0.0 && c_fp == 0.0 {
            return Err(Error::InvalidParameter(
                "risk costs must not both be zero".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            c_fn,
            c_fp,
        })
    }

    /// Equal-cost scenario: the plain error rate.
    pub fn risk_i() -> Self {
        Self::new("risk_I", 1.0, 1.0).unwrap()
    }

    /// Asymmetric clinical scenario: a miss costs 20 false alarms.
    pub fn risk_ii() -> Self {
        Self::new("risk_II", 20.0, 1.0).unwrap()
    }

    /// lambda = C_FN / C_FP, defined when C_FP > 0.
    pub fn cost_ratio(&self) -> Option<f64> {
        (self.c_fp > 0.0).then(|| self.c_fn / self.c_fp)
    }
}

/// Expected misclassification cost per sample: (C_FN*FN + C_FP*FP) / N.
///
/// `None` when the counts are empty.
pub fn risk(c: &ConfusionCounts, s: &RiskScenario) -> Option<f64> {
    match c.total() {
        0 => None,
        n => Some((s.c_fn * c.fnc as f64 + s.c_fp * c.fpc as f64) / n as f64),
    }
}

/// Evaluate risk across a list of cost ratios `lambda`, holding C_FP fixed.
pub fn risk_sweep(c: &ConfusionCounts, lambdas: &[f64], c_fp: f64) -> Vec<(f64, Option<f64>)> {
    lambdas
        .iter()
        .map(|&lambda| {
            let s = RiskScenario {
                name: format!("lambda_{lambda}"),
                c_fn: lambda * c_fp,
                c_fp,
            };
            (lambda, risk(c, &s))
        })
        .collect()
}

/// Rank-based AUC: P(score_pos > score_neg) + 0.5 P(tie) over all pairs.
///
/// Computed via integer doubled mid-ranks so the fast route agrees exactly
/// with pairwise enumeration. `None` when either class is absent.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<Option<f64>> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::InvalidParameter(format!(
            "non-binary label {bad} in auc input"
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite { layer: None });
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count() as u128;
    let n_neg = labels.len() as u128 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Ok(None);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Doubled mid-rank of a tie group spanning sorted positions [i, j)
    // (1-based ranks) is i + j + 1, an integer.
    let mut doubled_rank_sum_pos: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let doubled_midrank = (i + j + 1) as u128;
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                doubled_rank_sum_pos += doubled_midrank;
            }
        }
        i = j;
    }
    // 2U = 2R - n_pos(n_pos + 1) counts 2*(wins) + ties exactly.
    let doubled_u = doubled_rank_sum_pos - n_pos * (n_pos + 1);
    Ok(Some(doubled_u as f64 / (2 * n_pos * n_neg) as f64))
}

/// Degenerate-prediction detector.
///
/// Returns `(flag, positive_prediction_rate)`; the flag raises when either
/// class takes at least `rate_threshold` of the predictions.
pub fn collapse_flag(predictions: &[u8], rate_threshold: f64) -> Result<(bool, f64)> {
    if predictions.is_empty() {
        return Err(Error::InvalidParameter(
            "collapse_flag on empty predictions".into(),
        ));
    }
    let pos = predictions.iter().filter(|&&p| p == 1).count() as f64;
    let ppr = pos / predictions.len() as f64;
    Ok((ppr >= rate_threshold || (1.0 - ppr) >= rate_threshold, ppr))
}

pub const DEFAULT_COLLAPSE_THRESHOLD: f64 = 0.9;

/// Flat, fixed-key record of every evaluation metric for one run.
///
/// Undefined metrics serialize as `null` and render as `n/a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub bac: Option<f64>,
    pub f1: Option<f64>,
    pub auc: Option<f64>,
    #[serde(rename = "risk_I")]
    pub risk_i: Option<f64>,
    #[serde(rename = "risk_II")]
    pub risk_ii: Option<f64>,
    /// Positive prediction rate.
    pub ppr: f64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_count: u64,
    pub n: u64,
    /// Risks for scenarios beyond the two standard ones, keyed `risk_<name>`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty", flatten)]
    pub extra_risks: BTreeMap<String, Option<f64>>,
}

impl MetricsRecord {
    /// Evaluate predictions and scores against clean labels.
    ///
    /// `scores` are the positive-class probabilities used for AUC.
    pub fn compute(
        predictions: &[u8],
        labels: &[u8],
        scores: &[f64],
        scenarios: &[RiskScenario],
    ) -> Result<Self> {
        let counts = ConfusionCounts::from_predictions(predictions, labels)?;
        let auc_value = auc(scores, labels)?;
        let (_, ppr) = collapse_flag(predictions, DEFAULT_COLLAPSE_THRESHOLD)?;
        let mut record = Self {
            sensitivity: counts.sensitivity(),
            specificity: counts.specificity(),
            bac: counts.bac(),
            f1: counts.f1(),
            auc: auc_value,
            risk_i: None,
            risk_ii: None,
            ppr,
            tp: counts.tpc,
            fp: counts.fpc,
            tn: counts.tnc,
            fn_count: counts.fnc,
            n: counts.total(),
            extra_risks: BTreeMap::new(),
        };
        for s in scenarios {
            let value = risk(&counts, s);
            match s.name.as_str() {
                "risk_I" => record.risk_i = value,
                "risk_II" => record.risk_ii = value,
                other => {
                    record.extra_risks.insert(format!("risk_{other}"), value);
                }
            }
        }
        Ok(record)
    }

    /// Build a record from a confusion tally alone. AUC needs scores and is
    /// left undefined; the positive prediction rate follows from the counts.
    pub fn from_counts(counts: ConfusionCounts, scenarios: &[RiskScenario]) -> Result<Self> {
        if counts.total() == 0 {
            return Err(Error::InvalidParameter("empty confusion counts".into()));
        }
        let ppr = (counts.tpc + counts.fpc) as f64 / counts.total() as f64;
        let mut record = Self {
            sensitivity: counts.sensitivity(),
            specificity: counts.specificity(),
            bac: counts.bac(),
            f1: counts.f1(),
            auc: None,
            risk_i: None,
            risk_ii: None,
            ppr,
            tp: counts.tpc,
            fp: counts.fpc,
            tn: counts.tnc,
            fn_count: counts.fnc,
            n: counts.total(),
            extra_risks: BTreeMap::new(),
        };
        for s in scenarios {
            let value = risk(&counts, s);
            match s.name.as_str() {
                "risk_I" => record.risk_i = value,
                "risk_II" => record.risk_ii = value,
                other => {
                    record.extra_risks.insert(format!("risk_{other}"), value);
                }
            }
        }
        Ok(record)
    }

    pub fn counts(&self) -> ConfusionCounts {
        ConfusionCounts::new(self.tp, self.fp, self.tn, self.fn_count)
    }

    /// Risk under the collapse threshold convention used everywhere else.
    pub fn is_collapsed(&self) -> bool {
        self.ppr >= DEFAULT_COLLAPSE_THRESHOLD || (1.0 - self.ppr) >= DEFAULT_COLLAPSE_THRESHOLD
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reported_counts() -> ConfusionCounts {
        // Baseline at 0% noise on the dermatology benchmark: FN=114, FP=204,
        // test split 1613 benign + 392 malignant.
        ConfusionCounts::new(392 - 114, 204, 1613 - 204, 114)
    }

    #[test]
    fn confusion_hand_tally() {
        let c = ConfusionCounts::from_predictions(&[1, 0, 1, 0], &[1, 1, 0, 0]).unwrap();
        assert_eq!((c.tpc, c.fnc, c.fpc, c.tnc), (1, 1, 1, 1));
    }

    #[test]
    fn confusion_perfect_predictor() {
        let c = ConfusionCounts::from_predictions(&[1, 0, 1], &[1, 0, 1]).unwrap();
        assert_eq!(c.fpc, 0);
        assert_eq!(c.fnc, 0);
    }

    #[test]
    fn confusion_all_positive_collapse_pattern() {
        let c = ConfusionCounts::from_predictions(&[1, 1, 1, 1], &[1, 0, 1, 0]).unwrap();
        assert_eq!(c.fnc, 0);
        assert_eq!(c.tnc, 0);
    }

    #[test]
    fn confusion_rejects_mismatch_and_nonbinary() {
        assert!(ConfusionCounts::from_predictions(&[1, 0], &[1]).is_err());
        assert!(ConfusionCounts::from_predictions(&[2], &[1]).is_err());
    }

    #[test]
    fn sensitivity_specificity_basics() {
        let c = ConfusionCounts::new(1, 0, 0, 1);
        assert_eq!(c.sensitivity(), Some(0.5));
        let c = ConfusionCounts::new(3, 0, 5, 0);
        assert_eq!(c.sensitivity(), Some(1.0));
        let degenerate = ConfusionCounts::new(0, 2, 3, 0);
        assert_eq!(degenerate.sensitivity(), None);
    }

    #[test]
    fn bac_matches_reported_rows() {
        // (sens, spec, bac) triples rounded to 3 decimals, as a results
        // table would report them; the mean of two rounded inputs can land
        // exactly 0.0005 away from the rounded bac.
        let rows: [(f64, f64, f64); 6] = [
            (0.709, 0.874, 0.791),
            (0.820, 0.981, 0.901),
            (0.755, 0.846, 0.800),
            (0.843, 0.984, 0.913),
            (0.980, 0.485, 0.732),
            (0.977, 0.518, 0.748),
        ];
        for (sens, spec, reported) in rows {
            let bac = (sens + spec) / 2.0;
            assert!(
                (bac - reported).abs() <= 0.0005 + 1e-12,
                "({sens}, {spec}) -> {bac} vs {reported}"
            );
        }
        let perfect = ConfusionCounts::new(5, 0, 5, 0);
        assert_eq!(perfect.bac(), Some(1.0));
    }

    #[test]
    fn f1_cases() {
        assert_eq!(ConfusionCounts::new(1, 1, 0, 1).f1(), Some(0.5));
        assert_eq!(ConfusionCounts::new(4, 0, 2, 0).f1(), Some(1.0));
        assert_eq!(ConfusionCounts::new(0, 3, 1, 0).f1(), Some(0.0));
        assert_eq!(ConfusionCounts::new(0, 0, 7, 0).f1(), None);
    }

    #[test]
    fn risk_on_reported_counts() {
        let c = reported_counts();
        let risk_ii = risk(&c, &RiskScenario::risk_ii()).unwrap();
        assert!((risk_ii - 2484.0 / 2005.0).abs() < 1e-12);
        assert!((risk_ii - 1.2389).abs() < 1e-4);

        let collapsed = ConfusionCounts::new(392 - 59, 910, 1613 - 910, 59);
        let collapsed_risk_ii = risk(&collapsed, &RiskScenario::risk_ii()).unwrap();
        assert!((collapsed_risk_ii - 2090.0 / 2005.0).abs() < 1e-12);
        assert!((collapsed_risk_ii - 1.0424).abs() < 1e-4);
        assert!(collapsed_risk_ii < risk_ii);
    }

    #[test]
    fn risk_i_equals_error_rate() {
        let c = reported_counts();
        let risk_i = risk(&c, &RiskScenario::risk_i()).unwrap();
        assert_eq!(risk_i, (114.0 + 204.0) / 2005.0);
        assert!((risk_i - 0.1586).abs() < 1e-4);
    }

    #[test]
    fn risk_perfect_classifier_is_zero() {
        let c = ConfusionCounts::new(10, 0, 30, 0);
        assert_eq!(risk(&c, &RiskScenario::risk_ii()), Some(0.0));
    }

    #[test]
    fn risk_sweep_reported_counts() {
        let c = reported_counts();
        let sweep = risk_sweep(&c, &[1.0, 20.0], 1.0);
        assert_eq!(sweep[0].0, 1.0);
        assert!((sweep[0].1.unwrap() - 318.0 / 2005.0).abs() < 1e-12);
        assert!((sweep[1].1.unwrap() - 2484.0 / 2005.0).abs() < 1e-12);
    }

    #[test]
    fn risk_sweep_constant_without_false_negatives() {
        let c = ConfusionCounts::new(10, 7, 20, 0);
        let sweep = risk_sweep(&c, &[0.0, 1.0, 5.0, 100.0], 1.0);
        for (_, r) in &sweep {
            assert_eq!(r.unwrap(), 7.0 / 37.0);
        }
    }

    #[test]
    fn risk_sweep_scale_invariant() {
        let c = ConfusionCounts::new(10, 7, 20, 3);
        let doubled = ConfusionCounts::new(20, 14, 40, 6);
        let a = risk_sweep(&c, &[1.0, 2.0, 20.0], 1.0);
        let b = risk_sweep(&doubled, &[1.0, 2.0, 20.0], 1.0);
        for ((_, ra), (_, rb)) in a.iter().zip(&b) {
            assert_eq!(ra.unwrap(), rb.unwrap());
        }
    }

    #[test]
    fn moving_error_from_fn_to_fp_lowers_asymmetric_risk_exactly() {
        let s = RiskScenario::risk_ii();
        let before = ConfusionCounts::new(278, 204, 1409, 114);
        let after = ConfusionCounts::new(278, 205, 1408, 113);
        let num_before = s.c_fn * before.fnc as f64 + s.c_fp * before.fpc as f64;
        let num_after = s.c_fn * after.fnc as f64 + s.c_fp * after.fpc as f64;
        assert_eq!(num_before - num_after, s.c_fn - s.c_fp);
        assert!(risk(&after, &s).unwrap() < risk(&before, &s).unwrap());
    }

    #[test]
    fn auc_separated_and_tied() {
        let labels = [0, 0, 1, 1];
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap(), Some(1.0));
        assert_eq!(auc(&[0.5, 0.5, 0.5, 0.5], &labels).unwrap(), Some(0.5));
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap(), Some(0.0));
        assert_eq!(auc(&[0.1, 0.2], &[0, 0]).unwrap(), None);
    }

    #[test]
    fn collapse_flag_cases() {
        let (flag, ppr) = collapse_flag(&[1; 50], 0.9).unwrap();
        assert!(flag);
        assert_eq!(ppr, 1.0);

        let balanced: Vec<u8> = (0..50).map(|i| (i % 2) as u8).collect();
        let (flag, ppr) = collapse_flag(&balanced, 0.9).unwrap();
        assert!(!flag);
        assert_eq!(ppr, 0.5);

        // 91 of 100 positive sits above the 0.9 boundary.
        let mut preds = vec![1u8; 91];
        preds.extend(vec![0u8; 9]);
        let (flag, _) = collapse_flag(&preds, 0.9).unwrap();
        assert!(flag);

        // All-negative collapse is flagged too.
        let (flag, ppr) = collapse_flag(&[0; 10], 0.9).unwrap();
        assert!(flag);
        assert_eq!(ppr, 0.0);
    }

    #[test]
    fn metrics_record_fixed_keys() {
        let preds = [1u8, 0, 1, 0];
        let labels = [1u8, 1, 0, 0];
        let scores = [0.9, 0.4, 0.6, 0.1];
        let record = MetricsRecord::compute(
            &preds,
            &labels,
            &scores,
            &[RiskScenario::risk_i(), RiskScenario::risk_ii()],
        )
        .unwrap();
        let json: serde_json::Value = serde_json::to_value(&record).unwrap();
        for key in [
            "sensitivity",
            "specificity",
            "bac",
            "f1",
            "auc",
            "risk_I",
            "risk_II",
            "ppr",
            "tp",
            "fp",
            "tn",
            "fn",
            "n",
        ] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
        let back: MetricsRecord = serde_json::from_value(json).unwrap();
        assert_eq!(back, record);
    }

    #[test]
    fn bac_identity_holds() {
        let record = MetricsRecord::compute(
            &[1, 0, 1, 1, 0],
            &[1, 1, 0, 1, 0],
            &[0.8, 0.3, 0.7, 0.9, 0.2],
            &[RiskScenario::risk_i()],
        )
        .unwrap();
        let expected = (record.sensitivity.unwrap() + record.specificity.unwrap()) / 2.0;
        assert!((record.bac.unwrap() - expected).abs() < 1e-12);
    }
}
