//! Alignment of human ratings with the run's computed scores.
//!
//! The CSV carries `seed_id, mode, rater_id, overall_binary` plus optional
//! aspect columns: outline aspects (`cohesion`, `natural_flow`, `diversity`,
//! `redundancy`, `usefulness` on a 1-4 scale, binary `improvement`) and/or
//! the seven writing aspects on 0-100. Rows join to scorecards by
//! (seed_id, mode); the output is a Kendall tau per aspect column against
//! the binary overall rating.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::evaluate::load_scorecards;
use super::HarnessError;
use crate::checkeval::{kendall_tau, AspectName, CheckevalError};
use crate::domain::RunMode;

const OUTLINE_COLUMNS: [&str; 5] = [
    "cohesion",
    "natural_flow",
    "diversity",
    "redundancy",
    "usefulness",
];

/// One human row joined with its scorecard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedRecord {
    pub seed_id: String,
    pub mode: RunMode,
    pub rater_id: String,
    pub overall_binary: u8,
    /// Computed aspect scores from the scorecard.
    pub aspect_scores: BTreeMap<AspectName, f64>,
    /// Human-entered optional columns, by column name.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub human_columns: BTreeMap<String, f64>,
}

/// A human row that joined nothing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnmatchedRow {
    pub line: usize,
    pub reason: String,
}

/// Alignment result: joined rows, reported unmatched rows, and the tau per
/// aspect column (scorecard aspects by name, human columns prefixed
/// `human_`). Columns whose tau is undefined are listed in `skipped`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignReport {
    pub aligned: Vec<AlignedRecord>,
    pub unmatched: Vec<UnmatchedRow>,
    pub taus: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub skipped: Vec<String>,
}

/// Joins a human-score CSV against the run's scorecards and computes rank
/// correlations. Fails when a value is out of range or when more than
/// `max_unmatched_ratio` of the rows cannot be joined.
pub fn align_human_scores(
    run_dir: &Path,
    csv_path: &Path,
    max_unmatched_ratio: f64,
) -> Result<AlignReport, HarnessError> {
    if !run_dir.join("scorecards").join("scorecards.jsonl").exists() {
        return Err(HarnessError::NoScorecards);
    }
    let scorecards = load_scorecards(run_dir)?;
    if scorecards.is_empty() {
        return Err(HarnessError::NoScorecards);
    }
    let by_key: BTreeMap<(String, RunMode), &super::ScorecardRecord> = scorecards
        .iter()
        .map(|r| ((r.seed_id.clone(), r.mode), r))
        .collect();

    let mut reader =
        csv::Reader::from_path(csv_path).map_err(|e| HarnessError::Csv(e.to_string()))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| HarnessError::Csv(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let column = |name: &str| -> Result<usize, HarnessError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::MissingColumn(name.to_string()))
    };
    let seed_col = column("seed_id")?;
    let mode_col = column("mode")?;
    let rater_col = column("rater_id")?;
    let overall_col = column("overall_binary")?;

    // optional columns: everything else that parses as a number
    let known: [usize; 4] = [seed_col, mode_col, rater_col, overall_col];
    let optional: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| !known.contains(i))
        .map(|(i, h)| (i, h.clone()))
        .collect();

    let mut aligned = Vec::new();
    let mut unmatched = Vec::new();
    let mut total_rows = 0usize;
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 2; // header is line 1
        let row = row.map_err(|e| HarnessError::Csv(e.to_string()))?;
        total_rows += 1;

        let overall_raw = row.get(overall_col).unwrap_or("").trim();
        let overall_binary = match overall_raw {
            "0" => 0u8,
            "1" => 1u8,
            other => {
                return Err(HarnessError::RangeViolation {
                    line,
                    column: "overall_binary".into(),
                    value: other.to_string(),
                    range: "{0, 1}",
                })
            }
        };

        let mut human_columns = BTreeMap::new();
        for (col, name) in &optional {
            let raw = row.get(*col).unwrap_or("").trim();
            if raw.is_empty() {
                continue;
            }
            let Ok(value) = raw.parse::<f64>() else {
                continue; // non-numeric free-form columns ride along unchecked
            };
            check_range(line, name, raw, value)?;
            human_columns.insert(format!("human_{name}"), value);
        }

        let seed_id = row.get(seed_col).unwrap_or("").trim().to_string();
        let mode = match row.get(mode_col).unwrap_or("").trim().parse::<RunMode>() {
            Ok(mode) => mode,
            Err(reason) => {
                unmatched.push(UnmatchedRow { line, reason });
                continue;
            }
        };
        let Some(scorecard) = by_key.get(&(seed_id.clone(), mode)) else {
            unmatched.push(UnmatchedRow {
                line,
                reason: format!("no trace for ({seed_id}, {mode})"),
            });
            continue;
        };
        aligned.push(AlignedRecord {
            seed_id,
            mode,
            rater_id: row.get(rater_col).unwrap_or("").trim().to_string(),
            overall_binary,
            aspect_scores: scorecard.aspect_scores.clone(),
            human_columns,
        });
    }

    if total_rows > 0 && unmatched.len() as f64 > max_unmatched_ratio * total_rows as f64 {
        return Err(HarnessError::TooManyUnmatched {
            unmatched: unmatched.len(),
            total: total_rows,
            limit: max_unmatched_ratio * 100.0,
        });
    }

    let overall: Vec<f64> = aligned
        .iter()
        .map(|r| f64::from(r.overall_binary))
        .collect();
    let mut taus = BTreeMap::new();
    let mut skipped = Vec::new();
    for aspect in AspectName::ALL {
        let xs: Vec<f64> = aligned
            .iter()
            .filter_map(|r| r.aspect_scores.get(&aspect).copied())
            .collect();
        insert_tau(&mut taus, &mut skipped, aspect.as_str(), &xs, &overall);
    }
    let human_keys: std::collections::BTreeSet<String> = aligned
        .iter()
        .flat_map(|r| r.human_columns.keys().cloned())
        .collect();
    for key in human_keys {
        let pairs: Vec<(f64, f64)> = aligned
            .iter()
            .filter_map(|r| {
                r.human_columns
                    .get(&key)
                    .map(|v| (*v, f64::from(r.overall_binary)))
            })
            .collect();
        let xs: Vec<f64> = pairs.iter().map(|(x, _)| *x).collect();
        let ys: Vec<f64> = pairs.iter().map(|(_, y)| *y).collect();
        insert_tau(&mut taus, &mut skipped, &key, &xs, &ys);
    }

    let report = AlignReport {
        aligned,
        unmatched,
        taus,
        skipped,
    };
    let out = run_dir.join("reports").join("alignment.json");
    if let Some(parent) = out.parent() {
        std::fs::create_dir_all(parent).map_err(HarnessError::io("creating reports dir"))?;
    }
    std::fs::write(
        &out,
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )
    .map_err(HarnessError::io(format!("writing {}", out.display())))?;
    Ok(report)
}

fn check_range(line: usize, name: &str, raw: &str, value: f64) -> Result<(), HarnessError> {
    let violation = |range: &'static str| HarnessError::RangeViolation {
        line,
        column: name.to_string(),
        value: raw.to_string(),
        range,
    };
    if OUTLINE_COLUMNS.contains(&name) {
        if !(1.0..=4.0).contains(&value) {
            return Err(violation("[1, 4]"));
        }
    } else if name == "improvement" {
        if value != 0.0 && value != 1.0 {
            return Err(violation("{0, 1}"));
        }
    } else if AspectName::ALL.iter().any(|a| a.as_str() == name) && !(0.0..=100.0).contains(&value)
    {
        return Err(violation("[0, 100]"));
    }
    Ok(())
}

fn insert_tau(
    taus: &mut BTreeMap<String, f64>,
    skipped: &mut Vec<String>,
    key: &str,
    xs: &[f64],
    ys: &[f64],
) {
    match kendall_tau(xs, ys) {
        Ok(tau) => {
            taus.insert(key.to_string(), tau);
        }
        Err(CheckevalError::AllTied | CheckevalError::TooShort) => {
            skipped.push(format!("{key}: correlation undefined"));
        }
        Err(err) => skipped.push(format!("{key}: {err}")),
    }
}
