//! Aggregate report tables over the persisted evaluations: per-mode writing
//! scores with overall, outline metrics split initial/augmented, and the
//! same two tables broken down by seed domain. Emission is deterministic —
//! fixed row order, half-up rounding to two decimals — so repeated emissions
//! are byte-identical.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::evaluate::{load_config, load_jsonl, load_scorecards};
use super::{HarnessError, OutlineReportRecord, ScorecardRecord};
use crate::checkeval::AspectName;
use crate::domain::SeedDomain;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Tsv,
    Markdown,
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Tsv => "tsv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "tsv" => Ok(ReportFormat::Tsv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown format {other:?} (expected tsv|markdown)")),
        }
    }
}

/// Emits the four report files into `run_dir/reports` and returns their
/// paths. Errors when the run has no evaluations at all.
pub fn emit_report(run_dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>, HarnessError> {
    let config = load_config(run_dir)?;
    let seeds = super::ingest_seeds(run_dir.join("seeds.jsonl"))?;
    let domains: BTreeMap<String, SeedDomain> =
        seeds.iter().map(|s| (s.id.clone(), s.domain)).collect();

    let scorecards_path = run_dir.join("scorecards").join("scorecards.jsonl");
    let scorecards: Vec<ScorecardRecord> = if scorecards_path.exists() {
        load_scorecards(run_dir)?
    } else {
        Vec::new()
    };
    let outline_path = run_dir.join("metrics").join("outline_metrics.jsonl");
    let outlines: Vec<OutlineReportRecord> = if outline_path.exists() {
        load_jsonl(&outline_path)?
    } else {
        Vec::new()
    };
    if scorecards.is_empty() && outlines.is_empty() {
        return Err(HarnessError::NothingToReport);
    }

    let model = config.model_id.as_str();
    let reports_dir = run_dir.join("reports");
    std::fs::create_dir_all(&reports_dir).map_err(HarnessError::io("creating reports dir"))?;
    let mut files = Vec::new();

    if !scorecards.is_empty() {
        files.push(write_table(
            &reports_dir,
            "writing_scores",
            format,
            writing_table(model, &scorecards, None),
        )?);
        files.push(write_table(
            &reports_dir,
            "writing_scores_by_domain",
            format,
            writing_table(model, &scorecards, Some(&domains)),
        )?);
    }
    if !outlines.is_empty() {
        files.push(write_table(
            &reports_dir,
            "outline_metrics",
            format,
            outline_table(model, &outlines, None),
        )?);
        files.push(write_table(
            &reports_dir,
            "outline_metrics_by_domain",
            format,
            outline_table(model, &outlines, Some(&domains)),
        )?);
    }
    Ok(files)
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn writing_table(
    model: &str,
    scorecards: &[ScorecardRecord],
    domains: Option<&BTreeMap<String, SeedDomain>>,
) -> Table {
    let mut header = vec!["Model".to_string()];
    if domains.is_some() {
        header.push("Domain".into());
    }
    header.push("Mode".into());
    header.extend(AspectName::ALL.iter().map(|a| a.display_name().to_string()));
    header.push("Overall".into());

    // group rows by (domain?, mode), ordered by domain then mode
    let mut groups: BTreeMap<(Option<SeedDomain>, crate::domain::RunMode), Vec<&ScorecardRecord>> =
        BTreeMap::new();
    for record in scorecards {
        let domain = domains.map(|map| {
            map.get(&record.seed_id)
                .copied()
                .unwrap_or(SeedDomain::Other)
        });
        groups
            .entry((domain, record.mode))
            .or_default()
            .push(record);
    }

    let rows = groups
        .into_iter()
        .map(|((domain, mode), records)| {
            let mut row = vec![model.to_string()];
            if let Some(domain) = domain {
                row.push(domain.to_string());
            }
            row.push(mode.to_string());
            for aspect in AspectName::ALL {
                row.push(fmt_cell(mean(
                    records
                        .iter()
                        .filter_map(|r| r.aspect_scores.get(&aspect).copied()),
                )));
            }
            row.push(fmt_cell(mean(records.iter().map(|r| r.overall))));
            row
        })
        .collect();
    Table { header, rows }
}

fn outline_table(
    model: &str,
    outlines: &[OutlineReportRecord],
    domains: Option<&BTreeMap<String, SeedDomain>>,
) -> Table {
    let mut header = vec!["Model".to_string()];
    if domains.is_some() {
        header.push("Domain".into());
    }
    header.extend(
        [
            "Outline",
            "NLI",
            "UCI",
            "NPMI",
            "Topic Diversity",
            "Self-BLEU",
        ]
        .iter()
        .map(|s| s.to_string()),
    );

    let mut groups: BTreeMap<(Option<SeedDomain>, super::OutlineType), Vec<&OutlineReportRecord>> =
        BTreeMap::new();
    for record in outlines {
        let domain = domains.map(|map| {
            map.get(&record.seed_id)
                .copied()
                .unwrap_or(SeedDomain::Other)
        });
        groups
            .entry((domain, record.outline_type))
            .or_default()
            .push(record);
    }

    let rows = groups
        .into_iter()
        .map(|((domain, outline_type), records)| {
            let mut row = vec![model.to_string()];
            if let Some(domain) = domain {
                row.push(domain.to_string());
            }
            row.push(outline_type.to_string());
            for metric in [
                |r: &OutlineReportRecord| r.nli,
                |r: &OutlineReportRecord| r.uci,
                |r: &OutlineReportRecord| r.npmi,
                |r: &OutlineReportRecord| r.topic_diversity,
                |r: &OutlineReportRecord| r.self_bleu,
            ] {
                row.push(fmt_cell(mean(records.iter().filter_map(|r| metric(r)))));
            }
            row
        })
        .collect();
    Table { header, rows }
}

/// Mean over the present values; `None` when nothing is present (printed
/// as "-", matching how unavailable metrics are reported).
fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let collected: Vec<f64> = values.collect();
    if collected.is_empty() {
        None
    } else {
        Some(collected.iter().sum::<f64>() / collected.len() as f64)
    }
}

/// Half-up rounding to two decimals.
fn fmt_cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.2}", (v * 100.0).round() / 100.0),
        None => "-".into(),
    }
}

fn write_table(
    dir: &Path,
    name: &str,
    format: ReportFormat,
    table: Table,
) -> Result<PathBuf, HarnessError> {
    let path = dir.join(format!("{name}.{}", format.extension()));
    let mut out = String::new();
    match format {
        ReportFormat::Tsv => {
            out.push_str(&table.header.join("\t"));
            out.push('\n');
            for row in &table.rows {
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
        }
        ReportFormat::Markdown => {
            out.push_str(&format!("| {} |\n", table.header.join(" | ")));
            out.push_str(&format!("|{}\n", " --- |".repeat(table.header.len())));
            for row in &table.rows {
                out.push_str(&format!("| {} |\n", row.join(" | ")));
            }
        }
    }
    std::fs::write(&path, out).map_err(HarnessError::io(format!("writing {}", path.display())))?;
    Ok(path)
}
