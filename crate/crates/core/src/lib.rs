//! Outline-guided writing pipeline over pluggable LLM/search providers, plus the
//! evaluation stack that scores what the pipeline produces.
//!
//! The crate is organised around the run lifecycle:
//!
//! - [`domain`] — the shared value types (seeds, metadata, outlines, traces).
//! - [`prompts`] — stage prompt templates and the parsers that pull structured
//!   artifacts back out of raw completions.
//! - [`providers`] — LLM completion and blog-search contracts with live HTTP
//!   adapters, a deterministic scripted provider, and a persistent cache.
//! - [`pipeline`] — the five-step writing run and its three ablation modes.
//! - [`metrics`] — outline quality metrics: NLI alignment, NPMI/UCI coherence,
//!   topic diversity, and Self-BLEU redundancy.
//! - [`checkeval`] — checklist-based writing evaluation and rank correlation.
//! - [`harness`] — seed ingestion, experiment orchestration, report emission,
//!   and human-score alignment.
//! - [`fixtures`] — deterministic fixture generation for offline runs and tests.
//!
//! A minimal scripted run:
//!
//! ```no_run
//! use std::sync::Arc;
//! use writing_path_core::domain::RunMode;
//! use writing_path_core::fixtures::FixtureBuilder;
//! use writing_path_core::harness::ingest_seeds;
//! use writing_path_core::pipeline::{PipelineConfig, WritingPath};
//! use writing_path_core::prompts::{FewshotExamples, TemplateSet};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let assets = writing_path_core::default_assets_dir();
//! let templates = Arc::new(TemplateSet::load_manifest(assets.join("templates/manifest.txt"))?);
//! let fewshot = Arc::new(FewshotExamples::load(assets.join("templates/fewshot.txt"))?);
//! let config = PipelineConfig::new(templates, fewshot);
//!
//! let seed = ingest_seeds(assets.join("fixtures/seeds.jsonl"))?.remove(0);
//! let mut builder = FixtureBuilder::new(config.clone());
//! builder.script_seed(&seed)?;
//! let (llm, search) = builder.providers();
//!
//! let pipeline = WritingPath::new(Arc::new(llm), Arc::new(search), config);
//! let runtime = tokio::runtime::Runtime::new()?;
//! let trace = runtime
//!     .block_on(pipeline.run_writing_path(&seed, RunMode::Aug))
//!     .map_err(|failure| failure.message.clone())?;
//! println!("{}", trace.document.full_text);
//! # Ok(())
//! # }
//! ```

pub mod checkeval;
pub mod domain;
pub mod fixtures;
pub mod harness;
pub mod metrics;
pub mod pipeline;
pub mod prompts;
pub mod providers;

/// Root of the bundled data files (templates, checklist, seed fixtures).
///
/// Resolves relative to the workspace checkout; deployments that relocate the
/// assets should pass explicit paths through the run config instead.
pub fn default_assets_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join("assets")
}
