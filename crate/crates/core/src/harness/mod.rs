//! Experiment orchestration: seed ingestion, runs across seeds × modes,
//! evaluation of the produced artifacts, report emission, and alignment
//! against human scores.
//!
//! Every run writes a self-contained directory:
//!
//! ```text
//! output_dir/
//!   run_config.json      frozen config snapshot
//!   seeds.jsonl          the ingested seeds
//!   traces/              traces.jsonl + failures.jsonl, appended as runs finish
//!   metrics/             outline_metrics.jsonl + eval diagnostics
//!   scorecards/          scorecards.jsonl
//!   reports/             emitted tables and alignment output
//! ```

mod align;
mod config;
mod evaluate;
mod ingest;
mod report;
mod runner;

pub use align::{align_human_scores, AlignReport, AlignedRecord, UnmatchedRow};
pub use config::{CoherenceCorpus, ExperimentConfig};
pub use evaluate::{
    evaluate_run, load_scorecards, load_traces, EvalOutput, OutlineDiagnostics,
    OutlineReportRecord, OutlineType, ScorecardRecord,
};
pub use ingest::{ingest_seeds, IngestError};
pub use report::{emit_report, ReportFormat};
pub use runner::{run_experiment, ExperimentRun, FailureSummary, RunStats};

use crate::checkeval::CheckevalError;
use crate::metrics::MetricError;
use crate::prompts::PromptError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error("io ({context}): {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("every seed failed; see traces/failures.jsonl")]
    AllSeedsFailed,
    #[error("run directory has no traces to evaluate")]
    NoTraces,
    #[error("nothing to report: run has no evaluations")]
    NothingToReport,
    #[error("no scorecards found; run `eval` before `align`")]
    NoScorecards,
    #[error("csv row {line}: column {column} value {value} outside {range}")]
    RangeViolation {
        line: usize,
        column: String,
        value: String,
        range: &'static str,
    },
    #[error("csv is missing required column {0:?}")]
    MissingColumn(String),
    #[error("{unmatched} of {total} human rows did not match any trace (limit {limit:.0}%)")]
    TooManyUnmatched {
        unmatched: usize,
        total: usize,
        limit: f64,
    },
    #[error("csv: {0}")]
    Csv(String),
    #[error("bad record in {file} line {line}: {reason}")]
    BadRecord {
        file: String,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Checkeval(#[from] CheckevalError),
}

impl HarnessError {
    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> HarnessError {
        let context = context.into();
        move |source| HarnessError::Io { context, source }
    }
}
