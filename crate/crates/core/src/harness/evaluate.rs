//! Evaluation of a completed run: outline metrics for every initial and
//! augmented outline, and a writing scorecard for every composed document.
//! Results persist as line-delimited JSON under the run directory.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CoherenceCorpus, ExperimentConfig, HarnessError};
use crate::checkeval::{
    evaluate_writing, AspectName, Checklist, WritingJudgeConfig, WritingScorecard,
};
use crate::domain::{Outline, PipelineTrace, RunMode, SeedPost};
use crate::metrics::{
    nli_alignment, outline_coherence, outline_self_bleu, outline_topic_diversity, MetricError,
    NliJudgeConfig,
};
use crate::prompts::{Stage, TemplateSet};
use crate::providers::LlmProvider;

/// Which outline of a trace a metrics row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlineType {
    Initial,
    Augmented,
}

impl fmt::Display for OutlineType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutlineType::Initial => "initial",
            OutlineType::Augmented => "augmented",
        })
    }
}

/// Skips and per-item failures hit while scoring one outline.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlineDiagnostics {
    pub skipped_sections: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diversity_k: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

/// One outline metrics row; absent values mean the metric was undefined or
/// failed for this outline (see diagnostics).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlineReportRecord {
    pub seed_id: String,
    pub outline_type: OutlineType,
    pub nli: Option<f64>,
    pub uci: Option<f64>,
    pub npmi: Option<f64>,
    pub topic_diversity: Option<f64>,
    pub self_bleu: Option<f64>,
    pub diagnostics: OutlineDiagnostics,
}

/// One writing scorecard row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorecardRecord {
    pub seed_id: String,
    pub mode: RunMode,
    pub aspect_scores: std::collections::BTreeMap<AspectName, f64>,
    pub overall: f64,
}

impl ScorecardRecord {
    pub fn new(seed_id: String, mode: RunMode, scorecard: WritingScorecard) -> Self {
        ScorecardRecord {
            seed_id,
            mode,
            aspect_scores: scorecard.aspect_scores,
            overall: scorecard.overall,
        }
    }
}

/// Everything `eval` produced for a run.
#[derive(Debug)]
pub struct EvalOutput {
    pub outline_reports: Vec<OutlineReportRecord>,
    pub scorecards: Vec<ScorecardRecord>,
    /// Per-item failures that did not stop the evaluation.
    pub notes: Vec<String>,
}

/// Evaluates every outline and document of a persisted run. Per-item metric
/// failures are recorded (in row diagnostics or the output notes) rather
/// than aborting the pass.
pub async fn evaluate_run(
    run_dir: &Path,
    judge: Arc<dyn LlmProvider>,
) -> Result<EvalOutput, HarnessError> {
    let config = load_config(run_dir)?;
    let traces = load_traces(run_dir)?;
    if traces.is_empty() {
        return Err(HarnessError::NoTraces);
    }
    let seeds = load_seeds(run_dir)?;
    let templates = TemplateSet::load_manifest(&config.templates_manifest)?;
    let checklist = Checklist::load(&config.checklist)?;

    let corpus = coherence_corpus(&config, &seeds, &traces)?;

    // one row per (seed, outline type); modes share s1/s2 artifacts so the
    // first trace carrying an outline speaks for the seed
    let mut outline_reports = Vec::new();
    let mut scored: BTreeSet<(String, OutlineType)> = BTreeSet::new();
    let nli_template = templates.get(Stage::EvalNli)?;
    let nli_config = NliJudgeConfig {
        model_id: config.judge_model_id.clone(),
        temperature: config.temperatures.eval,
        max_tokens: 64,
        width: config.judge_concurrency,
    };
    for trace in &traces {
        for (outline_type, outline) in [
            (OutlineType::Initial, trace.initial_outline.as_ref()),
            (OutlineType::Augmented, trace.augmented_outline.as_ref()),
        ] {
            let Some(outline) = outline else { continue };
            if !scored.insert((trace.seed_id.clone(), outline_type)) {
                continue;
            }
            let record = score_outline(
                &trace.seed_id,
                outline_type,
                outline,
                &corpus,
                &config,
                judge.as_ref(),
                nli_template,
                &nli_config,
            )
            .await;
            outline_reports.push(record);
        }
    }
    outline_reports.sort_by(|a, b| (&a.seed_id, a.outline_type).cmp(&(&b.seed_id, b.outline_type)));

    let eval_template = templates.get(Stage::EvalWriting)?;
    let judge_config = WritingJudgeConfig {
        model_id: config.judge_model_id.clone(),
        temperature: config.temperatures.eval,
        max_tokens: config.judge_max_tokens,
        width: config.judge_concurrency,
    };
    let mut scorecards = Vec::new();
    let mut notes = Vec::new();
    for trace in &traces {
        match evaluate_writing(
            &trace.document,
            &checklist,
            judge.as_ref(),
            eval_template,
            &judge_config,
        )
        .await
        {
            Ok(scorecard) => scorecards.push(ScorecardRecord::new(
                trace.seed_id.clone(),
                trace.mode,
                scorecard,
            )),
            Err(err) => notes.push(format!(
                "scorecard for {} ({}) failed: {err}",
                trace.seed_id, trace.mode
            )),
        }
    }
    scorecards.sort_by(|a, b| (&a.seed_id, a.mode).cmp(&(&b.seed_id, b.mode)));

    persist_jsonl(
        &run_dir.join("metrics").join("outline_metrics.jsonl"),
        &outline_reports,
    )?;
    persist_jsonl(
        &run_dir.join("scorecards").join("scorecards.jsonl"),
        &scorecards,
    )?;
    if !notes.is_empty() {
        std::fs::write(
            run_dir.join("metrics").join("eval_notes.txt"),
            notes.join("\n") + "\n",
        )
        .map_err(HarnessError::io("writing eval_notes.txt"))?;
    }
    Ok(EvalOutput {
        outline_reports,
        scorecards,
        notes,
    })
}

#[allow(clippy::too_many_arguments)]
async fn score_outline(
    seed_id: &str,
    outline_type: OutlineType,
    outline: &Outline,
    corpus: &[String],
    config: &ExperimentConfig,
    judge: &dyn LlmProvider,
    nli_template: &crate::prompts::PromptTemplate,
    nli_config: &NliJudgeConfig,
) -> OutlineReportRecord {
    let mut record = OutlineReportRecord {
        seed_id: seed_id.to_string(),
        outline_type,
        nli: None,
        uci: None,
        npmi: None,
        topic_diversity: None,
        self_bleu: None,
        diagnostics: OutlineDiagnostics::default(),
    };

    match outline_coherence(outline, corpus, &config.metrics) {
        Ok(result) => {
            record.uci = Some(result.uci);
            record.npmi = Some(result.npmi);
            record.diagnostics.skipped_sections = result.skipped_sections;
        }
        Err(err) => record.diagnostics.notes.push(format!("coherence: {err}")),
    }
    match outline_topic_diversity(outline, corpus, &config.metrics) {
        Ok((score, k)) => {
            record.topic_diversity = Some(score);
            record.diagnostics.diversity_k = Some(k);
        }
        Err(err) => record.diagnostics.notes.push(format!("diversity: {err}")),
    }
    match outline_self_bleu(outline, &config.metrics) {
        Ok(score) => record.self_bleu = Some(score),
        Err(err) => record.diagnostics.notes.push(format!("self_bleu: {err}")),
    }
    match nli_alignment(outline, judge, nli_template, nli_config).await {
        Ok(report) => record.nli = Some(report.score),
        Err(MetricError::NoPairs) => {
            // header-only outlines (the initial shape) have nothing to align
            record
                .diagnostics
                .notes
                .push("nli: no header-subheader pairs".into());
        }
        Err(err) => record.diagnostics.notes.push(format!("nli: {err}")),
    }
    record
}

fn coherence_corpus(
    config: &ExperimentConfig,
    seeds: &[SeedPost],
    traces: &[PipelineTrace],
) -> Result<Vec<String>, HarnessError> {
    match &config.coherence_corpus {
        CoherenceCorpus::Run => {
            let mut corpus: Vec<String> = seeds.iter().map(|s| s.body.clone()).collect();
            let mut seen = BTreeSet::new();
            for trace in traces {
                if let Some(doc) = &trace.retrieved {
                    if seen.insert(doc.title.clone()) {
                        corpus.push(doc.body.clone());
                    }
                }
            }
            Ok(corpus)
        }
        CoherenceCorpus::File(path) => {
            let text = std::fs::read_to_string(path).map_err(HarnessError::io(format!(
                "reading corpus {}",
                path.display()
            )))?;
            Ok(text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(str::to_string)
                .collect())
        }
    }
}

pub(crate) fn load_config(run_dir: &Path) -> Result<ExperimentConfig, HarnessError> {
    let path = run_dir.join("run_config.json");
    let text = std::fs::read_to_string(&path)
        .map_err(HarnessError::io(format!("reading {}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::BadRecord {
        file: path.display().to_string(),
        line: 0,
        reason: e.to_string(),
    })
}

fn load_seeds(run_dir: &Path) -> Result<Vec<SeedPost>, HarnessError> {
    Ok(super::ingest_seeds(run_dir.join("seeds.jsonl"))?)
}

/// Loads the run's traces, sorted by (seed, mode).
pub fn load_traces(run_dir: &Path) -> Result<Vec<PipelineTrace>, HarnessError> {
    let path = run_dir.join("traces").join("traces.jsonl");
    let mut traces: Vec<PipelineTrace> = load_jsonl(&path)?;
    traces.sort_by(|a, b| (&a.seed_id, a.mode).cmp(&(&b.seed_id, b.mode)));
    Ok(traces)
}

/// Loads previously persisted scorecards, sorted by (seed, mode).
pub fn load_scorecards(run_dir: &Path) -> Result<Vec<ScorecardRecord>, HarnessError> {
    let path = run_dir.join("scorecards").join("scorecards.jsonl");
    let mut records: Vec<ScorecardRecord> = load_jsonl(&path)?;
    records.sort_by(|a, b| (&a.seed_id, a.mode).cmp(&(&b.seed_id, b.mode)));
    Ok(records)
}

pub(crate) fn load_jsonl<T: serde::de::DeserializeOwned>(
    path: &Path,
) -> Result<Vec<T>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(HarnessError::io(format!("reading {}", path.display())))?;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(line).map_err(|e| HarnessError::BadRecord {
                file: path.display().to_string(),
                line: idx + 1,
                reason: e.to_string(),
            })?,
        );
    }
    Ok(records)
}

pub(crate) fn persist_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), HarnessError> {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(HarnessError::io(format!("writing {}", path.display())))
}
