//! JSONL persistence for run results: one self-describing record per line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::run::{RunResult, SCHEMA_VERSION};

/// Write results as JSON Lines, one record per line, in the given order.
pub fn persist_results(results: &[RunResult], path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    for result in results {
        serde_json::to_writer(&mut out, result)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read results back. Blank lines are skipped; a malformed line fails with
/// its 1-based line number, and a record from a different schema version is
/// rejected outright.
pub fn load_results(path: impl AsRef<Path>) -> Result<Vec<RunResult>> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let mut results = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let result: RunResult = serde_json::from_str(line).map_err(|e| Error::ResultsParse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if result.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: result.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        results.push(result);
    }
    Ok(results)
}

/// The results serialized with wall-clock time zeroed: every field except
/// timing is deterministic, so two sweeps of the same config must produce
/// identical canonical bytes.
pub fn canonical_bytes(results: &[RunResult]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for result in results {
        let mut canonical = result.clone();
        canonical.wall_clock_secs = 0.0;
        serde_json::to_writer(&mut out, &canonical)?;
        out.push(b'\n');
    }
    Ok(out)
}
