//! Value types shared by every stage of the pipeline and the evaluation stack.
//!
//! Everything here is an immutable value after construction: constructors
//! validate the type invariants once, and the rest of the crate passes the
//! values around (or across tasks) freely. Seeds and traces serialize to
//! line-delimited JSON with snake_case field names.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Construction-time invariant violations for domain values.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("invalid {what}: {reason}")]
    InvalidInput { what: &'static str, reason: String },
    #[error("draft indices have a gap: expected {expected}, found {found}")]
    GapInIndices { expected: usize, found: usize },
}

impl DomainError {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        DomainError::InvalidInput {
            what,
            reason: reason.into(),
        }
    }
}

/// Content category of a seed blog post.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedDomain {
    Beauty,
    Travel,
    Gardening,
    Cooking,
    It,
    Other,
}

impl fmt::Display for SeedDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SeedDomain::Beauty => "beauty",
            SeedDomain::Travel => "travel",
            SeedDomain::Gardening => "gardening",
            SeedDomain::Cooking => "cooking",
            SeedDomain::It => "it",
            SeedDomain::Other => "other",
        };
        f.write_str(s)
    }
}

/// One human-written post used to seed a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPost {
    pub id: String,
    pub domain: SeedDomain,
    pub title: String,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_url: Option<String>,
}

impl SeedPost {
    pub fn validate(&self) -> Result<(), DomainError> {
        if self.id.trim().is_empty() {
            return Err(DomainError::invalid("seed", "id is empty"));
        }
        if self.body.trim().is_empty() {
            return Err(DomainError::invalid("seed", "body is empty"));
        }
        Ok(())
    }
}

/// The purpose/type/style/keywords bundle that steers a run.
///
/// All four fields are nonempty and keywords are deduplicated case-folded.
/// `extras` carries any additional free-form attributes (for example an
/// expected-reader note) without widening the core contract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub purpose: String,
    pub post_type: String,
    pub style: String,
    pub keywords: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, String>,
}

impl Metadata {
    pub fn new(
        purpose: impl Into<String>,
        post_type: impl Into<String>,
        style: impl Into<String>,
        keywords: Vec<String>,
    ) -> Result<Self, DomainError> {
        let purpose = purpose.into();
        let post_type = post_type.into();
        let style = style.into();
        for (name, value) in [
            ("purpose", &purpose),
            ("post_type", &post_type),
            ("style", &style),
        ] {
            if value.trim().is_empty() {
                return Err(DomainError::invalid("metadata", format!("{name} is empty")));
            }
        }
        let keywords = dedup_case_folded(keywords);
        if keywords.is_empty() {
            return Err(DomainError::invalid("metadata", "keywords are empty"));
        }
        Ok(Metadata {
            purpose,
            post_type,
            style,
            keywords,
            extras: BTreeMap::new(),
        })
    }

    /// Canonical numbered block used when binding metadata into a prompt.
    /// `prompts::parse_metadata_block` parses this format back.
    pub fn as_block(&self) -> String {
        format!(
            "1. purpose: {}\n2. type: {}\n3. style: {}\n4. keywords: {}",
            self.purpose,
            self.post_type,
            self.style,
            self.keywords.join(", ")
        )
    }
}

/// Drops exact duplicates under Unicode lowercasing, keeping first occurrences
/// (and their original casing). Empty entries are dropped.
pub fn dedup_case_folded(items: Vec<String>) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        let trimmed = item.trim();
        if trimmed.is_empty() {
            continue;
        }
        if seen.insert(trimmed.to_lowercase()) {
            out.push(trimmed.to_string());
        }
    }
    out
}

/// One outline section: a header plus its ordered subheaders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlineSection {
    pub header: String,
    pub subheaders: Vec<String>,
}

impl OutlineSection {
    pub fn new(header: impl Into<String>, subheaders: Vec<String>) -> Result<Self, DomainError> {
        let header = header.into();
        if header.trim().is_empty() {
            return Err(DomainError::invalid("outline section", "header is empty"));
        }
        let mut seen = std::collections::HashSet::new();
        for sub in &subheaders {
            if sub.trim().is_empty() {
                return Err(DomainError::invalid(
                    "outline section",
                    "subheader is empty",
                ));
            }
            if !seen.insert(sub.as_str()) {
                return Err(DomainError::invalid(
                    "outline section",
                    format!("duplicate subheader {sub:?}"),
                ));
            }
        }
        Ok(OutlineSection { header, subheaders })
    }

    pub fn header_only(header: impl Into<String>) -> Result<Self, DomainError> {
        OutlineSection::new(header, Vec::new())
    }
}

/// Ordered outline; section `i` (1-based) is `sections[i - 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outline {
    pub sections: Vec<OutlineSection>,
}

impl Outline {
    pub fn new(sections: Vec<OutlineSection>) -> Result<Self, DomainError> {
        if sections.is_empty() {
            return Err(DomainError::invalid("outline", "no sections"));
        }
        Ok(Outline { sections })
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    /// True when no section carries subheaders (the initial-outline shape).
    pub fn is_header_only(&self) -> bool {
        self.sections.iter().all(|s| s.subheaders.is_empty())
    }

    /// All (header, subheader) pairs in outline order.
    pub fn header_subheader_pairs(&self) -> Vec<(&str, &str)> {
        self.sections
            .iter()
            .flat_map(|s| {
                s.subheaders
                    .iter()
                    .map(move |sub| (s.header.as_str(), sub.as_str()))
            })
            .collect()
    }
}

/// Keywords extracted while browsing, tagged with the source document id.
/// May be empty when browsing soft-fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordSet {
    pub keywords: Vec<String>,
    pub provenance: String,
}

impl KeywordSet {
    pub fn new(keywords: Vec<String>, provenance: impl Into<String>) -> Self {
        KeywordSet {
            keywords: dedup_case_folded(keywords),
            provenance: provenance.into(),
        }
    }

    pub fn empty() -> Self {
        KeywordSet {
            keywords: Vec::new(),
            provenance: String::new(),
        }
    }
}

/// Top-ranked document returned by the search provider for a title query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievedDocument {
    pub query: String,
    pub title: String,
    pub body: String,
    pub rank: u32,
}

/// Draft text for one outline section. Construction normalizes blank lines
/// away so document composition stays reversible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionDraft {
    pub section_index: usize,
    pub text: String,
}

impl SectionDraft {
    pub fn new(section_index: usize, text: impl AsRef<str>) -> Result<Self, DomainError> {
        if section_index == 0 {
            return Err(DomainError::invalid(
                "draft",
                "section_index is 0 (1-based)",
            ));
        }
        let text = normalize_draft_text(text.as_ref());
        if text.is_empty() {
            return Err(DomainError::invalid("draft", "text is empty"));
        }
        Ok(SectionDraft {
            section_index,
            text,
        })
    }
}

/// Collapses blank lines to single newlines and trims the ends, so the result
/// never contains the blank-line separator documents are joined with.
pub fn normalize_draft_text(text: &str) -> String {
    text.lines()
        .map(str::trim_end)
        .filter(|line| !line.trim().is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

/// The assembled document: title plus drafts concatenated in section order,
/// separated by exactly one blank line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComposedDocument {
    pub title: String,
    pub drafts: Vec<SectionDraft>,
    pub full_text: String,
}

impl ComposedDocument {
    /// Joins the drafts in index order. Indices must form a contiguous
    /// 1..=n sequence.
    pub fn compose(
        title: impl Into<String>,
        mut drafts: Vec<SectionDraft>,
    ) -> Result<Self, DomainError> {
        if drafts.is_empty() {
            return Err(DomainError::invalid("document", "no drafts"));
        }
        drafts.sort_by_key(|d| d.section_index);
        for (pos, draft) in drafts.iter().enumerate() {
            if draft.section_index != pos + 1 {
                return Err(DomainError::GapInIndices {
                    expected: pos + 1,
                    found: draft.section_index,
                });
            }
        }
        let full_text = drafts
            .iter()
            .map(|d| d.text.as_str())
            .collect::<Vec<_>>()
            .join("\n\n");
        Ok(ComposedDocument {
            title: title.into(),
            drafts,
            full_text,
        })
    }

    /// Splits `full_text` back into the per-section texts.
    pub fn split_sections(&self) -> Vec<&str> {
        self.full_text.split("\n\n").collect()
    }
}

/// Which slice of the pipeline a run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// Draft straight from metadata; no outline artifacts.
    Meta,
    /// Draft from the initial outline; no browsing or augmentation.
    Init,
    /// The full five-step pipeline.
    Aug,
}

impl RunMode {
    pub const ALL: [RunMode; 3] = [RunMode::Meta, RunMode::Init, RunMode::Aug];

    pub fn as_str(&self) -> &'static str {
        match self {
            RunMode::Meta => "meta",
            RunMode::Init => "init",
            RunMode::Aug => "aug",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "meta" => Ok(RunMode::Meta),
            "init" => Ok(RunMode::Init),
            "aug" => Ok(RunMode::Aug),
            other => Err(format!("unknown mode {other:?} (expected meta|init|aug)")),
        }
    }
}

/// One logged provider completion: the stage label, the exact prompt sent,
/// and the raw completion received.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptLogEntry {
    pub stage: String,
    pub prompt: String,
    pub completion: String,
}

/// Wall-clock duration of one stage (or the search call) in milliseconds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTiming {
    pub label: String,
    pub ms: u64,
}

/// Complete record of one pipeline run over a single seed.
///
/// Append-only: the pipeline fills it in while running and nothing mutates it
/// afterwards. Which optional fields are present depends on the mode; see
/// [`validate_trace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub seed_id: String,
    pub mode: RunMode,
    pub metadata: Metadata,
    pub title: Option<String>,
    pub initial_outline: Option<Outline>,
    pub retrieved: Option<RetrievedDocument>,
    pub keywords: Option<KeywordSet>,
    pub augmented_outline: Option<Outline>,
    pub document: ComposedDocument,
    pub prompt_log: Vec<PromptLogEntry>,
    pub timings: Vec<StageTiming>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PipelineTrace {
    /// Serializes the trace with every timing zeroed, so byte comparison
    /// ignores wall-clock noise.
    pub fn canonical_json(&self) -> serde_json::Result<String> {
        let mut clone = self.clone();
        for timing in &mut clone.timings {
            timing.ms = 0;
        }
        serde_json::to_string(&clone)
    }
}

/// Checks the mode-dependent presence invariants of a trace. Violations are
/// returned as data, not errors; an empty list means the trace is consistent.
pub fn validate_trace(trace: &PipelineTrace) -> Vec<String> {
    let mode = trace.mode;
    let mut violations = Vec::new();
    let mut absent = |name: &str, present: bool| {
        if present {
            violations.push(format!("{name} present in {mode} mode"));
        }
    };
    match mode {
        RunMode::Meta => {
            absent("initial_outline", trace.initial_outline.is_some());
            absent("retrieved", trace.retrieved.is_some());
            absent("keywords", trace.keywords.is_some());
            absent("augmented_outline", trace.augmented_outline.is_some());
        }
        RunMode::Init => {
            absent("retrieved", trace.retrieved.is_some());
            absent("keywords", trace.keywords.is_some());
            absent("augmented_outline", trace.augmented_outline.is_some());
            if trace.initial_outline.is_none() {
                violations.push(format!("initial_outline absent in {mode} mode"));
            }
        }
        RunMode::Aug => {
            for (name, present) in [
                ("title", trace.title.is_some()),
                ("initial_outline", trace.initial_outline.is_some()),
                ("retrieved", trace.retrieved.is_some()),
                ("keywords", trace.keywords.is_some()),
                ("augmented_outline", trace.augmented_outline.is_some()),
            ] {
                if !present {
                    violations.push(format!("{name} absent in {mode} mode"));
                }
            }
        }
    }
    violations
}
