//! Experiment execution: every seed × mode through the pipeline, with a
//! bounded seed pool, incremental trace persistence, and per-(seed, mode)
//! failure isolation.

use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::Path;
use std::sync::{Arc, Mutex};

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};

use super::{ingest_seeds, ExperimentConfig, HarnessError};
use crate::domain::{PipelineTrace, RunMode, SeedPost};
use crate::pipeline::{PipelineConfig, WritingPath};
use crate::prompts::{FewshotExamples, TemplateSet};
use crate::providers::{
    CachedLlm, CachedSearch, CountingLlm, CountingSearch, LlmProvider, ResponseCache,
    SearchProvider,
};

/// Provider traffic that actually reached the underlying adapters (cache
/// hits excluded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub llm_calls: usize,
    pub search_calls: usize,
}

/// One failed (seed, mode) execution, as summarized in memory; the full
/// partial trace is in `traces/failures.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureSummary {
    pub seed_id: String,
    pub mode: RunMode,
    pub stage: String,
    pub message: String,
}

/// A completed experiment: config snapshot, traces, failures, and stats.
#[derive(Debug)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub traces: Vec<PipelineTrace>,
    pub failures: Vec<FailureSummary>,
    pub stats: RunStats,
}

/// Runs every configured mode for every seed. Traces append to
/// `traces/traces.jsonl` as they complete, so a crash loses at most the
/// in-flight seed. A (seed, mode) failure is recorded and skipped; the run
/// errors only when nothing succeeded at all.
pub async fn run_experiment(
    config: &ExperimentConfig,
    llm: Arc<dyn LlmProvider>,
    search: Arc<dyn SearchProvider>,
) -> Result<ExperimentRun, HarnessError> {
    let seeds = ingest_seeds(&config.seeds)?;
    let templates = Arc::new(TemplateSet::load_manifest(&config.templates_manifest)?);
    let fewshot = Arc::new(FewshotExamples::load(&config.fewshot)?);

    prepare_run_dir(config, &seeds)?;

    let cache =
        match &config.cache_dir {
            Some(dir) => Arc::new(ResponseCache::with_dir(dir).map_err(HarnessError::io(
                format!("creating cache dir {}", dir.display()),
            ))?),
            None => Arc::new(ResponseCache::memory_only()),
        };
    // counting sits under the cache, so the counters report real traffic;
    // the shared cache is also what reuses s1/s2 across modes within a seed
    let counting_llm = Arc::new(CountingLlm::new(llm));
    let llm_counter = counting_llm.counter();
    let counting_search = Arc::new(CountingSearch::new(search));
    let search_counter = counting_search.counter();
    let cached_llm: Arc<dyn LlmProvider> =
        Arc::new(CachedLlm::new(counting_llm, Arc::clone(&cache)));
    let cached_search: Arc<dyn SearchProvider> =
        Arc::new(CachedSearch::new(counting_search, Arc::clone(&cache)));

    let mut pipeline_config = PipelineConfig::new(templates, fewshot);
    pipeline_config.model_id = config.model_id.clone();
    pipeline_config.max_tokens = config.max_tokens;
    pipeline_config.temperatures = config.temperatures;
    pipeline_config.soft_fail_search = config.soft_fail_search;
    pipeline_config.section_concurrency = config.section_concurrency;
    pipeline_config.ordinal_offset = config.ordinal_offset;
    let pipeline = WritingPath::new(cached_llm, cached_search, pipeline_config);

    let traces_dir = config.output_dir.join("traces");
    let trace_sink = Sink::open(traces_dir.join("traces.jsonl"))?;
    let failure_sink = Sink::open(traces_dir.join("failures.jsonl"))?;

    let seed_runs: Vec<_> = seeds
        .iter()
        .map(|seed| run_one_seed(&pipeline, seed, &config.modes, &trace_sink, &failure_sink))
        .collect();
    let outcomes: Vec<(Vec<PipelineTrace>, Vec<FailureSummary>)> = stream::iter(seed_runs)
        .buffer_unordered(config.concurrency.max(1))
        .collect()
        .await;

    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for (seed_traces, seed_failures) in outcomes {
        traces.extend(seed_traces);
        failures.extend(seed_failures);
    }
    traces.sort_by(|a, b| (&a.seed_id, a.mode).cmp(&(&b.seed_id, b.mode)));
    failures.sort_by(|a, b| (&a.seed_id, a.mode).cmp(&(&b.seed_id, b.mode)));

    if traces.is_empty() {
        return Err(HarnessError::AllSeedsFailed);
    }
    Ok(ExperimentRun {
        config: config.clone(),
        traces,
        failures,
        stats: RunStats {
            llm_calls: llm_counter.load(std::sync::atomic::Ordering::SeqCst),
            search_calls: search_counter.load(std::sync::atomic::Ordering::SeqCst),
        },
    })
}

async fn run_one_seed(
    pipeline: &WritingPath,
    seed: &SeedPost,
    modes: &[RunMode],
    trace_sink: &Sink,
    failure_sink: &Sink,
) -> (Vec<PipelineTrace>, Vec<FailureSummary>) {
    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for &mode in modes {
        match pipeline.run_writing_path(seed, mode).await {
            Ok(trace) => {
                trace_sink.append_json(&trace);
                traces.push(trace);
            }
            Err(failure) => {
                tracing::warn!(seed = %seed.id, %mode, "run failed: {}", failure.message);
                failure_sink.append_json(&*failure);
                failures.push(FailureSummary {
                    seed_id: failure.seed_id.clone(),
                    mode: failure.mode,
                    stage: failure.stage.clone(),
                    message: failure.message.clone(),
                });
            }
        }
    }
    (traces, failures)
}

fn prepare_run_dir(config: &ExperimentConfig, seeds: &[SeedPost]) -> Result<(), HarnessError> {
    for sub in ["traces", "metrics", "scorecards", "reports"] {
        let dir = config.output_dir.join(sub);
        std::fs::create_dir_all(&dir)
            .map_err(HarnessError::io(format!("creating {}", dir.display())))?;
    }
    let snapshot = serde_json::to_string_pretty(config).expect("config serializes");
    std::fs::write(config.output_dir.join("run_config.json"), snapshot)
        .map_err(HarnessError::io("writing run_config.json"))?;
    let seed_lines: Vec<String> = seeds
        .iter()
        .map(|s| serde_json::to_string(s).expect("seed serializes"))
        .collect();
    std::fs::write(
        config.output_dir.join("seeds.jsonl"),
        seed_lines.join("\n") + "\n",
    )
    .map_err(HarnessError::io("writing seeds.jsonl"))?;
    Ok(())
}

/// Append-serialized JSONL file; each record is written and flushed whole.
struct Sink {
    file: Mutex<std::fs::File>,
}

impl Sink {
    fn open(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        // truncate: a rerun into the same directory starts a fresh log
        let file = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(path)
            .map_err(HarnessError::io(format!("opening {}", path.display())))?;
        Ok(Sink {
            file: Mutex::new(file),
        })
    }

    fn append_json<T: Serialize>(&self, record: &T) {
        let line = serde_json::to_string(record).expect("record serializes");
        let mut file = self.file.lock().expect("sink lock");
        let _ = writeln!(file, "{line}");
        let _ = file.flush();
    }
}
