//! Deterministic fixture generation for scripted runs.
//!
//! The builder renders the exact prompts the pipeline will issue (through
//! the shared [`PipelineConfig`] renderers) and registers a synthetic,
//! seed-derived completion for each, covering all three run modes plus the
//! writing and NLI judges. The resulting fixture files drive fully offline,
//! bit-reproducible experiments and the test suite.

use std::collections::BTreeMap;
use std::path::Path;

use crate::checkeval::{render_writing_eval_prompt, Checklist};
use crate::domain::{
    ComposedDocument, KeywordSet, Metadata, Outline, OutlineSection, RunMode, SectionDraft,
    SeedPost,
};
use crate::metrics::nli_prompt;
use crate::pipeline::{PipelineConfig, PipelineError};
use crate::prompts::{
    format_augmented_outline, format_title_and_initial_outline, parse_metadata_block,
    PromptTemplate,
};
use crate::providers::{ScriptedLlm, ScriptedSearch};

/// The artifacts a scripted seed will produce, kept so tests can compute
/// expected values without re-running the pipeline.
#[derive(Debug, Clone)]
pub struct ScriptedArtifacts {
    pub seed_id: String,
    pub metadata: Metadata,
    pub title: String,
    pub initial_outline: Outline,
    pub keywords: KeywordSet,
    pub augmented_outline: Outline,
    pub documents: BTreeMap<RunMode, ComposedDocument>,
}

/// Builds fixture sets for a pipeline configuration.
pub struct FixtureBuilder {
    config: PipelineConfig,
    llm: ScriptedLlm,
    search: ScriptedSearch,
    artifacts: Vec<ScriptedArtifacts>,
}

impl FixtureBuilder {
    pub fn new(config: PipelineConfig) -> Self {
        FixtureBuilder {
            config,
            llm: ScriptedLlm::new(),
            search: ScriptedSearch::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn artifacts(&self) -> &[ScriptedArtifacts] {
        &self.artifacts
    }

    /// Scripts every stage of every mode for one seed.
    pub fn script_seed(&mut self, seed: &SeedPost) -> Result<&ScriptedArtifacts, PipelineError> {
        let keywords = derived_keywords(seed);
        let metadata_completion = format!(
            "1. purpose: share hands-on notes about {}\n2. type: {} blog post\n3. style: friendly, first person\n4. keywords: {}",
            seed.title.to_lowercase(),
            seed.domain,
            keywords.join(", ")
        );
        self.llm
            .script(&self.config.s1_prompt(seed)?, &metadata_completion);
        let metadata = parse_metadata_block(&metadata_completion)?;

        let title = format!("Field notes: {}", seed.title);
        let initial_outline = Outline::new(vec![
            OutlineSection::header_only(format!("Starting with {}", keywords[0])).unwrap(),
            OutlineSection::header_only(format!("What {} taught us", keywords[1])).unwrap(),
            OutlineSection::header_only(format!("Closing thoughts on {}", keywords[2])).unwrap(),
        ])
        .expect("three sections");
        self.llm.script(
            &self.config.s2_prompt(&metadata)?,
            format_title_and_initial_outline(&title, &initial_outline),
        );

        let doc_title = format!("Related reading for {}", seed.title);
        let doc_body = format!(
            "{} Readers planning something similar also ask about {} and {}.",
            seed.body, keywords[1], keywords[2]
        );
        self.search.script(
            &title,
            crate::providers::FixtureDocument {
                title: doc_title.clone(),
                body: doc_body.clone(),
            },
        );
        let retrieved = crate::domain::RetrievedDocument {
            query: title.clone(),
            title: doc_title.clone(),
            body: doc_body,
            rank: 1,
        };
        let browsed = [
            keywords[0].clone(),
            keywords[1].clone(),
            format!("{} planning", keywords[2]),
            "practical checklists".to_string(),
        ];
        self.llm
            .script(&self.config.s3_prompt(&retrieved)?, browsed.join(", "));
        let keyword_set = KeywordSet::new(browsed.to_vec(), doc_title);

        let augmented_outline = Outline::new(
            initial_outline
                .sections
                .iter()
                .enumerate()
                .map(|(i, section)| {
                    OutlineSection::new(
                        section.header.clone(),
                        vec![
                            format!("{} essentials", browsed[i % browsed.len()]),
                            format!(
                                "A mistake to avoid with {}",
                                browsed[(i + 1) % browsed.len()]
                            ),
                        ],
                    )
                    .unwrap()
                })
                .collect(),
        )
        .expect("sections preserved");
        self.llm.script(
            &self
                .config
                .s4_prompt(&title, &keyword_set, &initial_outline)?,
            format_augmented_outline(&augmented_outline),
        );

        let mut documents = BTreeMap::new();

        // meta mode: one draft straight from metadata
        let meta_draft = format!(
            "Working from nothing but the plan, this post is about {}. The goal stays simple: {}. \
             Expect plain talk about {} and what actually happened.",
            seed.title.to_lowercase(),
            metadata.purpose,
            keywords.join(", ")
        );
        self.llm
            .script(&self.config.meta_mode_prompt(&metadata)?, &meta_draft);
        documents.insert(
            RunMode::Meta,
            ComposedDocument::compose("", vec![SectionDraft::new(1, &meta_draft).unwrap()])
                .unwrap(),
        );

        // init mode: one draft per initial-outline section
        let mut init_drafts = Vec::new();
        for index in 1..=initial_outline.len() {
            let header = &initial_outline.sections[index - 1].header;
            let text = format!(
                "{header} deserved its own chapter. I walked through it step by step, \
                 kept what worked, and wrote down the part nobody warns you about."
            );
            self.llm.script(
                &self
                    .config
                    .section_prompt(&title, &initial_outline, index, Some(&metadata))?,
                &text,
            );
            init_drafts.push(SectionDraft::new(index, text).unwrap());
        }
        documents.insert(
            RunMode::Init,
            ComposedDocument::compose(title.clone(), init_drafts).unwrap(),
        );

        // aug mode: one draft per augmented-outline section
        let mut aug_drafts = Vec::new();
        for index in 1..=augmented_outline.len() {
            let section = &augmented_outline.sections[index - 1];
            let text = format!(
                "{} came with homework: {} first, then {}. Between the browsing notes and a \
                 little stubbornness, this section ended up the most concrete of the post.",
                section.header, section.subheaders[0], section.subheaders[1]
            );
            self.llm.script(
                &self
                    .config
                    .section_prompt(&title, &augmented_outline, index, Some(&metadata))?,
                &text,
            );
            aug_drafts.push(SectionDraft::new(index, text).unwrap());
        }
        documents.insert(
            RunMode::Aug,
            ComposedDocument::compose(title.clone(), aug_drafts).unwrap(),
        );

        self.artifacts.push(ScriptedArtifacts {
            seed_id: seed.id.clone(),
            metadata,
            title,
            initial_outline,
            keywords: keyword_set,
            augmented_outline,
            documents,
        });
        Ok(self.artifacts.last().expect("just pushed"))
    }

    /// Scripts the writing judge for every document and the NLI judge for
    /// every augmented-outline pair, with deterministic mixed answers.
    pub fn script_judging(
        &mut self,
        checklist: &Checklist,
        eval_template: &PromptTemplate,
        nli_template: &PromptTemplate,
    ) -> Result<(), crate::checkeval::CheckevalError> {
        for artifact in &self.artifacts {
            for (mode, document) in &artifact.documents {
                for aspect in &checklist.aspects {
                    let prompt =
                        render_writing_eval_prompt(eval_template, aspect, &document.full_text)?;
                    let lines: Vec<String> = aspect
                        .questions()
                        .iter()
                        .enumerate()
                        .map(|(q, question)| {
                            let yes = scripted_answer(&artifact.seed_id, *mode, aspect.name, q);
                            format!("Q: {question} A: {}", if yes { "yes" } else { "no" })
                        })
                        .collect();
                    self.llm.script(&prompt, lines.join("\n"));
                }
            }
            for (i, (header, sub)) in artifact
                .augmented_outline
                .header_subheader_pairs()
                .iter()
                .enumerate()
            {
                let prompt = nli_prompt(nli_template, header, sub).expect("nli template renders");
                self.llm
                    .script(&prompt, scripted_nli_label(&artifact.seed_id, i));
            }
        }
        Ok(())
    }

    pub fn providers(self) -> (ScriptedLlm, ScriptedSearch) {
        (self.llm, self.search)
    }

    /// Writes `llm.jsonl` and `search.jsonl` fixture files into a directory.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> std::io::Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("llm.jsonl"), self.llm.to_jsonl())?;
        std::fs::write(dir.join("search.jsonl"), self.search.to_jsonl())?;
        Ok(())
    }
}

/// The deterministic yes/no answer the scripted writing judge gives for a
/// question; roughly three in four are positive.
pub fn scripted_answer(
    seed_id: &str,
    mode: RunMode,
    aspect: crate::checkeval::AspectName,
    question: usize,
) -> bool {
    !stable_hash(&format!("{seed_id}/{mode}/{aspect}/{question}")).is_multiple_of(4)
}

/// The deterministic label the scripted NLI judge gives for pair `i`;
/// roughly three in four are "entail".
pub fn scripted_nli_label(seed_id: &str, pair_index: usize) -> &'static str {
    match stable_hash(&format!("{seed_id}/nli/{pair_index}")) % 4 {
        0 => "neutral",
        _ => "entail",
    }
}

/// Three keywords derived from the seed body: the first distinct words of
/// five or more alphabetic characters.
fn derived_keywords(seed: &SeedPost) -> Vec<String> {
    let mut keywords: Vec<String> = Vec::new();
    for word in seed.body.split(|c: char| !c.is_alphabetic()) {
        if word.chars().count() >= 5 {
            let lowered = word.to_lowercase();
            if !keywords.contains(&lowered) {
                keywords.push(lowered);
            }
            if keywords.len() == 3 {
                return keywords;
            }
        }
    }
    while keywords.len() < 3 {
        keywords.push(format!("notes{}", keywords.len() + 1));
    }
    keywords
}

/// FNV-1a, for stable cross-run hashing of fixture decisions.
fn stable_hash(input: &str) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for byte in input.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
