//! CSV ingestion and reproducibility dumps.
//!
//! Schema: UTF-8, comma-separated, header row required, one sample per row.
//! Features are every column except the label column and the reserved
//! `true_label` / `flip` columns; feature order follows the header.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{LabeledDataset, SplitTag};
use crate::error::{Error, Result};

/// Total map from source class identifiers to {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BinarizationMap {
    pub mapping: BTreeMap<String, u8>,
}

impl BinarizationMap {
    pub fn new(mapping: BTreeMap<String, u8>) -> Result<Self> {
        if mapping.values().any(|&v| v > 1) {
            return Err(Error::InvalidParameter(
                "binarization targets must be 0 or 1".into(),
            ));
        }
        if !mapping.values().any(|&v| v == 0) || !mapping.values().any(|&v| v == 1) {
            return Err(Error::InvalidParameter(
                "binarization must map at least one class to each of 0 and 1".into(),
            ));
        }
        Ok(Self { mapping })
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u8)>,
        S: Into<String>,
    {
        Self::new(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn apply(&self, value: &str) -> Option<u8> {
        self.mapping.get(value).copied()
    }
}

fn parse_label(
    raw: &str,
    binarization: Option<&BinarizationMap>,
    row: usize,
) -> Result<u8> {
    let raw = raw.trim();
    if let Some(map) = binarization {
        return map.apply(raw).ok_or_else(|| Error::UnmappedClass {
            value: raw.to_string(),
            row,
        });
    }
    match raw.parse::<f64>() {
        Ok(0.0) => Ok(0),
        Ok(1.0) => Ok(1),
        _ => Err(Error::UnmappedClass {
            value: raw.to_string(),
            row,
        }),
    }
}

/// Read a labeled dataset from `path`.
///
/// `true_label` and `flip` columns are recognized from our own dumps:
/// `true_label` populates the hidden ground truth (and the flip mask is
/// recomputed), `flip` is ignored. Without a `true_label` column the
/// provenance is unknown and `true_labels` stays absent.
pub fn ingest_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    binarization: Option<&BinarizationMap>,
    split_tag: SplitTag,
) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::CsvIngest {
            path: display.clone(),
            reason: e.to_string(),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::CsvIngest {
            path: display.clone(),
            reason: e.to_string(),
        })?
        .clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::CsvIngest {
            path: display.clone(),
            reason: format!("label column {label_column:?} not found in header"),
        })?;
    let true_label_idx = headers.iter().position(|h| h == "true_label");
    let flip_idx = headers.iter().position(|h| h == "flip");

    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| i != label_idx && Some(i) != true_label_idx && Some(i) != flip_idx)
        .collect();
    let feature_names: Vec<String> = feature_cols
        .iter()
        .map(|&i| headers[i].to_string())
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut observed = Vec::new();
    let mut true_labels: Vec<u8> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::CsvIngest {
            path: display.clone(),
            reason: format!("row {}: {e}", row_idx + 1),
        })?;
        let mut row = Vec::with_capacity(feature_cols.len());
        for (&col, name) in feature_cols.iter().zip(&feature_names) {
            let cell = record.get(col).unwrap_or("");
            let value: f64 = cell.parse().map_err(|_| Error::CsvIngest {
                path: display.clone(),
                reason: format!(
                    "non-numeric cell {cell:?} in column {name:?} at row {}",
                    row_idx + 1
                ),
            })?;
            row.push(value);
        }
        rows.push(row);
        observed.push(parse_label(
            record.get(label_idx).unwrap_or(""),
            binarization,
            row_idx + 1,
        )?);
        if let Some(t_idx) = true_label_idx {
            true_labels.push(parse_label(
                record.get(t_idx).unwrap_or(""),
                binarization,
                row_idx + 1,
            )?);
        }
    }

    if rows.is_empty() {
        return Err(Error::CsvIngest {
            path: display,
            reason: "no data rows".into(),
        });
    }

    let d = feature_cols.len();
    let mut features = Array2::zeros((rows.len(), d));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            features[[i, j]] = v;
        }
    }

    let (true_labels, flip_mask) = if true_label_idx.is_some() {
        let mask: Vec<bool> = observed
            .iter()
            .zip(&true_labels)
            .map(|(&o, &t)| o != t)
            .collect();
        (Some(true_labels), Some(mask))
    } else {
        (None, None)
    };

    LabeledDataset::new(features, observed, true_labels, flip_mask, split_tag)
}

/// Write a dataset in the ingestion schema, plus `true_label` and `flip`
/// columns when ground truth is present.
pub fn dump_csv(dataset: &LabeledDataset, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let d = dataset.feature_dim();
    let with_truth = dataset.true_labels.is_some();

    let mut header: Vec<String> = (0..d).map(|j| format!("f{j}")).collect();
    header.push(label_column.to_string());
    if with_truth {
        header.push("true_label".into());
        header.push("flip".into());
    }
    writer.write_record(&header)?;

    for i in 0..dataset.n_samples() {
        let mut record: Vec<String> = (0..d)
            .map(|j| format!("{}", dataset.features[[i, j]]))
            .collect();
        record.push(dataset.observed_labels[i].to_string());
        if with_truth {
            let t = dataset.true_labels.as_ref().unwrap()[i];
            let f = dataset
                .flip_mask
                .as_ref()
                .map(|m| u8::from(m[i]))
                .unwrap_or(u8::from(t != dataset.observed_labels[i]));
            record.push(t.to_string());
            record.push(f.to_string());
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
