//! Seed ingestion from line-delimited JSON.

use std::collections::HashSet;
use std::path::Path;

use crate::domain::SeedPost;

/// A rejected seed file, pointing at the offending line (0 for file-level
/// problems).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("seed file line {line}: {reason}")]
pub struct IngestError {
    pub line: usize,
    pub reason: String,
}

/// Reads and validates seeds. Duplicate ids, empty bodies, and malformed
/// records are rejected with their line number.
pub fn ingest_seeds(path: impl AsRef<Path>) -> Result<Vec<SeedPost>, IngestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| IngestError {
        line: 0,
        reason: format!("cannot read {}: {e}", path.display()),
    })?;
    let mut seeds = Vec::new();
    let mut ids = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let seed: SeedPost = serde_json::from_str(line).map_err(|e| IngestError {
            line: line_no,
            reason: format!("invalid seed record: {e}"),
        })?;
        seed.validate().map_err(|e| IngestError {
            line: line_no,
            reason: e.to_string(),
        })?;
        if !ids.insert(seed.id.clone()) {
            return Err(IngestError {
                line: line_no,
                reason: format!("duplicate id {:?}", seed.id),
            });
        }
        seeds.push(seed);
    }
    if seeds.is_empty() {
        return Err(IngestError {
            line: 0,
            reason: "seed file contains no records".into(),
        });
    }
    Ok(seeds)
}
