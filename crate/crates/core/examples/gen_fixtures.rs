//! Generates a deterministic scripted-fixture set for a run config, so the
//! CLI can execute fully offline:
//!
//! ```sh
//! cargo run -p writing-path-core --example gen_fixtures -- run.conf fixtures/
//! writing-path run --config run.conf --scripted fixtures/
//! ```

use std::sync::Arc;

use writing_path_core::checkeval::Checklist;
use writing_path_core::fixtures::FixtureBuilder;
use writing_path_core::harness::{ingest_seeds, ExperimentConfig};
use writing_path_core::pipeline::PipelineConfig;
use writing_path_core::prompts::{FewshotExamples, Stage, TemplateSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let (Some(config_path), Some(out_dir)) = (args.next(), args.next()) else {
        eprintln!("usage: gen_fixtures <run-config> <output-dir>");
        std::process::exit(2);
    };

    let config = ExperimentConfig::load(&config_path)?;
    let templates = Arc::new(TemplateSet::load_manifest(&config.templates_manifest)?);
    let fewshot = Arc::new(FewshotExamples::load(&config.fewshot)?);
    let mut pipeline_config = PipelineConfig::new(templates.clone(), fewshot);
    pipeline_config.model_id = config.model_id.clone();
    pipeline_config.max_tokens = config.max_tokens;
    pipeline_config.temperatures = config.temperatures;
    pipeline_config.ordinal_offset = config.ordinal_offset;

    let seeds = ingest_seeds(&config.seeds)?;
    let mut builder = FixtureBuilder::new(pipeline_config);
    for seed in &seeds {
        builder.script_seed(seed)?;
    }
    let checklist = Checklist::load(&config.checklist)?;
    builder.script_judging(
        &checklist,
        templates.get(Stage::EvalWriting)?,
        templates.get(Stage::EvalNli)?,
    )?;
    builder.write_dir(&out_dir)?;
    println!(
        "wrote llm.jsonl and search.jsonl for {} seeds to {out_dir}",
        seeds.len()
    );
    Ok(())
}
