//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A spec or config field violates its stated domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// CSV ingestion failures carry the offending row/value.
    #[error("csv ingest ({path}): {reason}")]
    CsvIngest { path: String, reason: String },

    /// Label value present in the file but absent from the binarization map.
    #[error("unmapped class value {value:?} at row {row}")]
    UnmappedClass { value: String, row: usize },

    /// Noise injection refuses to touch evaluation splits.
    #[error("refusing to inject noise into the {0} split; only the train split may be corrupted")]
    CleanSplitViolation(String),

    /// All losses identical; EM cannot separate two components.
    #[error("degenerate loss vector (all values identical); caller should fall back to selecting all samples")]
    DegenerateLosses,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Non-finite value surfaced during training; layer index when known.
    #[error("non-finite value encountered{}", .layer.map(|l| format!(" in layer {l}")).unwrap_or_default())]
    NonFinite { layer: Option<usize> },

    /// Train/test data carries only one observed class.
    #[error("dataset has a single observed class; two classes are required")]
    SingleClass,

    #[error("config error: {0}")]
    Config(String),

    #[error("results file line {line}: {reason}")]
    ResultsParse { line: usize, reason: String },

    #[error("results schema version {found} not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("report error: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
