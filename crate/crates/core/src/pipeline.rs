//! The five-step writing run: metadata, title + initial outline, browsing,
//! outline augmentation, and section drafting — plus the three ablation
//! modes that stop the pipeline early.
//!
//! Within a run the stages are strictly sequential; section drafting can fan
//! out when configured, with drafts re-ordered by index before composition so
//! traces stay deterministic. Every completion call lands in the stage log.

use std::sync::Arc;
use std::time::Instant;

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};

use crate::domain::{
    ComposedDocument, DomainError, KeywordSet, Metadata, Outline, PipelineTrace, PromptLogEntry,
    RetrievedDocument, RunMode, SectionDraft, SeedPost, StageTiming,
};
use crate::prompts::{
    outline_body, parse_augmented_outline, parse_keyword_list, parse_metadata_block,
    parse_title_and_initial_outline, render_prompt, BindingMap, FewshotExamples, ParseError,
    PromptError, Stage, TemplateSet,
};
use crate::providers::{
    CompletionRequest, LlmProvider, ProviderError, SearchError, SearchProvider, SearchQuery,
};

/// Hard failure inside a run step.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("section index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Everything the pipeline recorded before a run aborted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartialTrace {
    pub seed_id: String,
    pub mode: RunMode,
    pub metadata: Option<Metadata>,
    pub title: Option<String>,
    pub initial_outline: Option<Outline>,
    pub retrieved: Option<RetrievedDocument>,
    pub keywords: Option<KeywordSet>,
    pub augmented_outline: Option<Outline>,
    pub drafts: Vec<SectionDraft>,
    pub prompt_log: Vec<PromptLogEntry>,
    pub timings: Vec<StageTiming>,
    pub warnings: Vec<String>,
}

/// A failed run: the first hard error plus the partial trace up to it.
#[derive(Debug, Clone, Serialize, Deserialize, thiserror::Error)]
#[error("run for seed {seed_id} ({mode}) failed at {stage}: {message}")]
pub struct PipelineFailure {
    pub seed_id: String,
    pub mode: RunMode,
    pub stage: String,
    pub message: String,
    pub partial: PartialTrace,
}

/// Per-stage sampling temperatures. Generation stages default to 0.7 and
/// judging to 0.0; neither is a calibrated constant, both are exposed in the
/// run config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTemperatures {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub s5: f64,
    pub eval: f64,
}

impl Default for StageTemperatures {
    fn default() -> Self {
        StageTemperatures {
            s1: 0.7,
            s2: 0.7,
            s3: 0.7,
            s4: 0.7,
            s5: 0.7,
            eval: 0.0,
        }
    }
}

impl StageTemperatures {
    pub fn for_stage(&self, stage: Stage) -> f64 {
        match stage {
            Stage::S1Metadata => self.s1,
            Stage::S2TitleOutline => self.s2,
            Stage::S3Keywords => self.s3,
            Stage::S4Augment => self.s4,
            Stage::S5Write => self.s5,
            Stage::EvalWriting | Stage::EvalNli => self.eval,
        }
    }
}

/// Static configuration for a pipeline instance.
#[derive(Clone)]
pub struct PipelineConfig {
    pub model_id: String,
    pub max_tokens: u32,
    pub temperatures: StageTemperatures,
    /// Continue with an empty keyword set when search finds nothing, instead
    /// of aborting the run.
    pub soft_fail_search: bool,
    /// Width of the section-drafting fan-out; 1 keeps drafting sequential.
    pub section_concurrency: usize,
    /// Added to the 1-based section index when binding the `{ordinal}` slot.
    pub ordinal_offset: i64,
    pub templates: Arc<TemplateSet>,
    pub fewshot: Arc<FewshotExamples>,
}

impl PipelineConfig {
    pub fn new(templates: Arc<TemplateSet>, fewshot: Arc<FewshotExamples>) -> Self {
        PipelineConfig {
            model_id: "gpt-3.5-turbo".into(),
            max_tokens: 1024,
            temperatures: StageTemperatures::default(),
            soft_fail_search: false,
            section_concurrency: 1,
            ordinal_offset: 0,
            templates,
            fewshot,
        }
    }
    // ---- prompt construction ----------------------------------------------
    //
    // These renderers are the single source of truth for what each stage
    // sends; fixture generation reuses them, so scripted runs can never
    // drift from the live prompts.

    pub fn s1_prompt(&self, seed: &SeedPost) -> Result<String, PipelineError> {
        let template = self.templates.get(Stage::S1Metadata)?;
        let mut bindings = BindingMap::new();
        self.fewshot.bind(template, &mut bindings);
        bindings.insert(
            "original blog text".into(),
            format!("Title: {}\n{}", seed.title, seed.body),
        );
        Ok(render_prompt(template, &bindings)?)
    }

    pub fn s2_prompt(&self, metadata: &Metadata) -> Result<String, PipelineError> {
        let template = self.templates.get(Stage::S2TitleOutline)?;
        let mut bindings = BindingMap::new();
        self.fewshot.bind(template, &mut bindings);
        bindings.insert("meta data".into(), metadata.as_block());
        Ok(render_prompt(template, &bindings)?)
    }

    pub fn s3_prompt(&self, document: &RetrievedDocument) -> Result<String, PipelineError> {
        let template = self.templates.get(Stage::S3Keywords)?;
        let mut bindings = BindingMap::new();
        bindings.insert(
            "document".into(),
            format!("{}\n{}", document.title, document.body),
        );
        Ok(render_prompt(template, &bindings)?)
    }

    pub fn s4_prompt(
        &self,
        title: &str,
        keywords: &KeywordSet,
        initial: &Outline,
    ) -> Result<String, PipelineError> {
        let template = self.templates.get(Stage::S4Augment)?;
        let mut bindings = BindingMap::new();
        self.fewshot.bind(template, &mut bindings);
        let mut info = format!("Title: {title}");
        if !keywords.keywords.is_empty() {
            info.push_str("\nKeywords: ");
            info.push_str(&keywords.keywords.join(", "));
        }
        bindings.insert("additional information from browsing".into(), info);
        bindings.insert("initial outline".into(), outline_body(initial));
        Ok(render_prompt(template, &bindings)?)
    }

    pub fn s5_prompt(
        &self,
        title: &str,
        outline_text: &str,
        section_text: &str,
        section_index: usize,
        metadata: Option<&Metadata>,
    ) -> Result<String, PipelineError> {
        let template = self.templates.get(Stage::S5Write)?;
        let mut bindings = BindingMap::new();
        bindings.insert(
            "ordinal".into(),
            (section_index as i64 + self.ordinal_offset).to_string(),
        );
        bindings.insert("augmented outline".into(), outline_text.to_string());
        bindings.insert(
            "meta data".into(),
            metadata.map(Metadata::as_block).unwrap_or_default(),
        );
        bindings.insert("title".into(), title.to_string());
        bindings.insert("current section".into(), section_text.to_string());
        Ok(render_prompt(template, &bindings)?)
    }

    /// The section prompt for a given outline section, as the run issues it.
    /// `section_index` is 1-based.
    pub fn section_prompt(
        &self,
        title: &str,
        outline: &Outline,
        section_index: usize,
        metadata: Option<&Metadata>,
    ) -> Result<String, PipelineError> {
        if section_index == 0 || section_index > outline.len() {
            return Err(PipelineError::IndexOutOfRange {
                index: section_index,
                len: outline.len(),
            });
        }
        self.s5_prompt(
            title,
            &outline_body(outline),
            &section_block(outline, section_index),
            section_index,
            metadata,
        )
    }

    /// The single drafting prompt meta mode issues: the metadata block stands
    /// in for the outline and the title is left blank.
    pub fn meta_mode_prompt(&self, metadata: &Metadata) -> Result<String, PipelineError> {
        let block = metadata.as_block();
        self.s5_prompt("", &block, &block, 1, Some(metadata))
    }
}

/// Accumulates prompt-log entries, timings, and warnings while a run
/// executes. Passed explicitly so the ops stay plain functions over values.
#[derive(Debug, Default)]
pub struct StageLog {
    pub entries: Vec<PromptLogEntry>,
    pub timings: Vec<StageTiming>,
    pub warnings: Vec<String>,
}

impl StageLog {
    pub fn new() -> Self {
        Self::default()
    }

    fn record(&mut self, stage: Stage, label: String, prompt: String, completion: String, ms: u64) {
        self.entries.push(PromptLogEntry {
            stage: stage.as_str().to_string(),
            prompt,
            completion,
        });
        self.timings.push(StageTiming { label, ms });
    }
}

/// The pipeline over a provider pair.
pub struct WritingPath {
    llm: Arc<dyn LlmProvider>,
    search: Arc<dyn SearchProvider>,
    config: PipelineConfig,
}

impl WritingPath {
    pub fn new(
        llm: Arc<dyn LlmProvider>,
        search: Arc<dyn SearchProvider>,
        config: PipelineConfig,
    ) -> Self {
        WritingPath {
            llm,
            search,
            config,
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    // ---- steps ---------------------------------------------------------------

    /// Step 1: turn a seed post into metadata.
    pub async fn prepare_metadata(
        &self,
        seed: &SeedPost,
        log: &mut StageLog,
    ) -> Result<Metadata, PipelineError> {
        if seed.body.trim().is_empty() {
            return Err(PipelineError::InvalidInput("seed body is empty".into()));
        }
        let prompt = self.config.s1_prompt(seed)?;
        let completion = self.complete(Stage::S1Metadata, None, prompt, log).await?;
        Ok(parse_metadata_block(&completion)?)
    }

    /// Step 2: generate the title and the header-only initial outline.
    pub async fn generate_title_and_outline(
        &self,
        metadata: &Metadata,
        log: &mut StageLog,
    ) -> Result<(String, Outline), PipelineError> {
        let prompt = self.config.s2_prompt(metadata)?;
        let completion = self
            .complete(Stage::S2TitleOutline, None, prompt, log)
            .await?;
        Ok(parse_title_and_initial_outline(&completion)?)
    }

    /// Step 3: retrieve the top document for the title and extract keywords
    /// from it. With soft-fail enabled, an empty result set yields an empty
    /// keyword set instead of aborting.
    pub async fn browse(
        &self,
        title: &str,
        log: &mut StageLog,
    ) -> Result<(Option<RetrievedDocument>, KeywordSet), PipelineError> {
        let query = SearchQuery::top1(title)?;
        let started = Instant::now();
        let outcome = self.search.search_top1(&query).await;
        log.timings.push(StageTiming {
            label: "search".into(),
            ms: started.elapsed().as_millis() as u64,
        });
        let document = match outcome {
            Ok(doc) => doc,
            Err(SearchError::NoResults(q)) if self.config.soft_fail_search => {
                log.warnings.push(format!(
                    "search returned no results for {q:?}; continuing with empty keywords"
                ));
                return Ok((None, KeywordSet::empty()));
            }
            Err(err) => return Err(err.into()),
        };
        let prompt = self.config.s3_prompt(&document)?;
        let completion = self.complete(Stage::S3Keywords, None, prompt, log).await?;
        let mut keywords = parse_keyword_list(&completion);
        keywords.provenance = document.title.clone();
        Ok((Some(document), keywords))
    }

    /// Step 4: enrich the initial outline with subheaders drawn from the
    /// browsed keywords. Header rephrasing and section-count drift are
    /// tolerated and surface as warnings, not errors.
    pub async fn augment_outline(
        &self,
        title: &str,
        keywords: &KeywordSet,
        initial: &Outline,
        log: &mut StageLog,
    ) -> Result<Outline, PipelineError> {
        let prompt = self.config.s4_prompt(title, keywords, initial)?;
        let completion = self.complete(Stage::S4Augment, None, prompt, log).await?;
        let augmented = parse_augmented_outline(&completion)?;
        if augmented.len() != initial.len() {
            log.warnings.push(format!(
                "augmentation changed the section count from {} to {}",
                initial.len(),
                augmented.len()
            ));
        }
        if augmented.is_header_only() {
            log.warnings.push("no augmentation detected".into());
        }
        Ok(augmented)
    }

    /// Step 5 for one section: draft the text for `section_index` (1-based,
    /// rejected with `IndexOutOfRange` when outside the outline).
    pub async fn write_section(
        &self,
        title: &str,
        outline: &Outline,
        section_index: usize,
        metadata: Option<&Metadata>,
        log: &mut StageLog,
    ) -> Result<SectionDraft, PipelineError> {
        let prompt = self
            .config
            .section_prompt(title, outline, section_index, metadata)?;
        let completion = self
            .complete(Stage::S5Write, Some(section_index), prompt, log)
            .await?;
        Ok(SectionDraft::new(section_index, completion)?)
    }

    /// Drafts every section of an outline, fanning out when configured.
    /// Prompt-log order is by section index either way.
    async fn write_all_sections(
        &self,
        title: &str,
        outline: &Outline,
        metadata: Option<&Metadata>,
        log: &mut StageLog,
    ) -> Result<Vec<SectionDraft>, PipelineError> {
        let width = self.config.section_concurrency.max(1);
        if width == 1 {
            let mut drafts = Vec::with_capacity(outline.len());
            for index in 1..=outline.len() {
                drafts.push(
                    self.write_section(title, outline, index, metadata, log)
                        .await?,
                );
            }
            return Ok(drafts);
        }

        let outline_text = outline_body(outline);
        let mut prompts = Vec::with_capacity(outline.len());
        for index in 1..=outline.len() {
            prompts.push((
                index,
                self.config.s5_prompt(
                    title,
                    &outline_text,
                    &section_block(outline, index),
                    index,
                    metadata,
                )?,
            ));
        }
        let calls: Vec<_> = prompts
            .into_iter()
            .map(|(index, prompt)| async move {
                let started = Instant::now();
                let outcome = self.request(Stage::S5Write, &prompt).await;
                (index, prompt, outcome, started.elapsed().as_millis() as u64)
            })
            .collect();
        let mut results = stream::iter(calls)
            .buffer_unordered(width)
            .collect::<Vec<_>>()
            .await;
        results.sort_by_key(|(index, ..)| *index);

        let mut drafts = Vec::with_capacity(results.len());
        for (index, prompt, outcome, ms) in results {
            let completion = outcome?;
            log.record(
                Stage::S5Write,
                format!("s5_write#{index}"),
                prompt,
                completion.clone(),
                ms,
            );
            drafts.push(SectionDraft::new(index, completion)?);
        }
        Ok(drafts)
    }

    /// Executes the mode's slice of the pipeline for one seed. The first hard
    /// error aborts the run and is returned with the partial trace attached.
    pub async fn run_writing_path(
        &self,
        seed: &SeedPost,
        mode: RunMode,
    ) -> Result<PipelineTrace, Box<PipelineFailure>> {
        let mut log = StageLog::new();
        let mut partial = PartialTrace {
            seed_id: seed.id.clone(),
            mode,
            metadata: None,
            title: None,
            initial_outline: None,
            retrieved: None,
            keywords: None,
            augmented_outline: None,
            drafts: Vec::new(),
            prompt_log: Vec::new(),
            timings: Vec::new(),
            warnings: Vec::new(),
        };

        let result = self.run_inner(seed, mode, &mut log, &mut partial).await;
        match result {
            Ok(document) => Ok(PipelineTrace {
                seed_id: seed.id.clone(),
                mode,
                metadata: partial.metadata.expect("metadata set before completion"),
                title: partial.title,
                initial_outline: partial.initial_outline,
                retrieved: partial.retrieved,
                keywords: partial.keywords,
                augmented_outline: partial.augmented_outline,
                document,
                prompt_log: log.entries,
                timings: log.timings,
                warnings: log.warnings,
            }),
            Err((stage, error)) => {
                partial.prompt_log = log.entries;
                partial.timings = log.timings;
                partial.warnings = log.warnings;
                Err(Box::new(PipelineFailure {
                    seed_id: seed.id.clone(),
                    mode,
                    stage,
                    message: error.to_string(),
                    partial,
                }))
            }
        }
    }

    async fn run_inner(
        &self,
        seed: &SeedPost,
        mode: RunMode,
        log: &mut StageLog,
        partial: &mut PartialTrace,
    ) -> Result<ComposedDocument, (String, PipelineError)> {
        let staged = |stage: Stage| move |e: PipelineError| (stage.as_str().to_string(), e);

        let metadata = self
            .prepare_metadata(seed, log)
            .await
            .map_err(staged(Stage::S1Metadata))?;
        partial.metadata = Some(metadata.clone());

        if mode == RunMode::Meta {
            // Single drafting call with the metadata block standing in for
            // the outline; the document has one section and no title.
            let prompt = self
                .config
                .meta_mode_prompt(&metadata)
                .map_err(staged(Stage::S5Write))?;
            let completion = self
                .complete(Stage::S5Write, Some(1), prompt, log)
                .await
                .map_err(staged(Stage::S5Write))?;
            let draft = SectionDraft::new(1, completion)
                .map_err(|e| (Stage::S5Write.as_str().to_string(), PipelineError::from(e)))?;
            partial.drafts = vec![draft.clone()];
            return compose_document("", vec![draft]).map_err(staged(Stage::S5Write));
        }

        let (title, initial) = self
            .generate_title_and_outline(&metadata, log)
            .await
            .map_err(staged(Stage::S2TitleOutline))?;
        partial.title = Some(title.clone());
        partial.initial_outline = Some(initial.clone());

        let outline = match mode {
            RunMode::Meta => unreachable!("handled above"),
            RunMode::Init => initial,
            RunMode::Aug => {
                let (retrieved, keywords) = self
                    .browse(&title, log)
                    .await
                    .map_err(staged(Stage::S3Keywords))?;
                partial.retrieved = retrieved;
                partial.keywords = Some(keywords.clone());
                let augmented = self
                    .augment_outline(&title, &keywords, &initial, log)
                    .await
                    .map_err(staged(Stage::S4Augment))?;
                partial.augmented_outline = Some(augmented.clone());
                augmented
            }
        };

        let drafts = self
            .write_all_sections(&title, &outline, Some(&metadata), log)
            .await
            .map_err(staged(Stage::S5Write))?;
        partial.drafts = drafts.clone();
        compose_document(title, drafts).map_err(staged(Stage::S5Write))
    }

    async fn request(&self, stage: Stage, prompt: &str) -> Result<String, PipelineError> {
        let request = CompletionRequest::new(
            prompt,
            &self.config.model_id,
            self.config.temperatures.for_stage(stage),
            self.config.max_tokens,
            stage.as_str(),
        )?;
        Ok(self.llm.complete(&request).await?.text)
    }

    async fn complete(
        &self,
        stage: Stage,
        section: Option<usize>,
        prompt: String,
        log: &mut StageLog,
    ) -> Result<String, PipelineError> {
        let started = Instant::now();
        let completion = self.request(stage, &prompt).await?;
        let label = match section {
            Some(index) => format!("{}#{index}", stage.as_str()),
            None => stage.as_str().to_string(),
        };
        log.record(
            stage,
            label,
            prompt,
            completion.clone(),
            started.elapsed().as_millis() as u64,
        );
        Ok(completion)
    }
}

/// The numbered lines of one outline section, using its true (1-based,
/// in-range) index.
pub fn section_block(outline: &Outline, section_index: usize) -> String {
    let section = &outline.sections[section_index - 1];
    let mut out = format!("{}. {}", section_index, section.header);
    for (j, sub) in section.subheaders.iter().enumerate() {
        out.push_str(&format!("\n  {}.{} {}", section_index, j + 1, sub));
    }
    out
}

/// Joins drafts into the final document; indices must be contiguous from 1.
pub fn compose_document(
    title: impl Into<String>,
    drafts: Vec<SectionDraft>,
) -> Result<ComposedDocument, PipelineError> {
    ComposedDocument::compose(title, drafts).map_err(PipelineError::from)
}
