//! Stage prompt templates and the parsers for the structured blocks the
//! model is instructed to emit.
//!
//! Templates are plain UTF-8 data files with `{slot}` markers — no
//! conditionals, no loops. A sidecar manifest maps each stage to its file and
//! declares the required slot set; loading verifies the declaration against
//! the slots actually present in the body.

mod format;
mod parse;

pub use format::{format_augmented_outline, format_title_and_initial_outline, outline_body};
pub use parse::{
    parse_augmented_outline, parse_keyword_list, parse_metadata_block,
    parse_title_and_initial_outline,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// The prompt stages: the five pipeline steps plus the two judge prompts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    S1Metadata,
    S2TitleOutline,
    S3Keywords,
    S4Augment,
    S5Write,
    EvalWriting,
    EvalNli,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::S1Metadata,
        Stage::S2TitleOutline,
        Stage::S3Keywords,
        Stage::S4Augment,
        Stage::S5Write,
        Stage::EvalWriting,
        Stage::EvalNli,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::S1Metadata => "s1_metadata",
            Stage::S2TitleOutline => "s2_title_outline",
            Stage::S3Keywords => "s3_keywords",
            Stage::S4Augment => "s4_augment",
            Stage::S5Write => "s5_write",
            Stage::EvalWriting => "eval_writing",
            Stage::EvalNli => "eval_nli",
        }
    }

    fn from_token(token: &str) -> Option<Stage> {
        Stage::ALL.iter().copied().find(|s| s.as_str() == token)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Errors from template loading, rendering, and completion parsing.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("missing slot {{{0}}}")]
    MissingSlot(String),
    #[error("unknown slot {{{0}}}")]
    UnknownSlot(String),
    #[error("template for {stage}: body slot {{{slot}}} is not declared")]
    UndeclaredSlot { stage: Stage, slot: String },
    #[error("template for {stage}: declared slot {{{slot}}} never appears in the body")]
    UnusedSlot { stage: Stage, slot: String },
    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error("template io ({path}): {reason}")]
    Io { path: String, reason: String },
}

/// Parse failures for the structured completion blocks.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("missing block =={0}==")]
    MissingBlock(String),
    #[error("no parseable items in block =={0}==")]
    NoItems(String),
    #[error("subheader before any header: {0:?}")]
    OrphanSubheader(String),
    #[error("missing field {0:?}")]
    MissingField(String),
}

/// Slot name → value bindings for one render.
pub type BindingMap = BTreeMap<String, String>;

/// A stage prompt: body text with `{slot}` markers and the declared slot set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub stage: Stage,
    pub body: String,
    pub required_slots: BTreeSet<String>,
}

impl PromptTemplate {
    /// Builds a template, verifying that the declared slots and the `{slot}`
    /// occurrences in the body agree exactly.
    pub fn new(
        stage: Stage,
        body: impl Into<String>,
        required_slots: impl IntoIterator<Item = String>,
    ) -> Result<Self, PromptError> {
        let body = body.into();
        let required_slots: BTreeSet<String> = required_slots.into_iter().collect();
        let found = slots_in_body(&body);
        for slot in &found {
            if !required_slots.contains(slot) {
                return Err(PromptError::UndeclaredSlot {
                    stage,
                    slot: slot.clone(),
                });
            }
        }
        for slot in &required_slots {
            if !found.contains(slot) {
                return Err(PromptError::UnusedSlot {
                    stage,
                    slot: slot.clone(),
                });
            }
        }
        Ok(PromptTemplate {
            stage,
            body,
            required_slots,
        })
    }
}

/// Collects slot names appearing in a body, in order of first appearance.
/// A slot is `{name}` where the name contains no braces or newlines; anything
/// else involving braces is treated as literal text.
fn slots_in_body(body: &str) -> Vec<String> {
    let mut slots = Vec::new();
    let bytes = body.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some(rel) = body[i + 1..].find(['{', '}', '\n']) {
                let j = i + 1 + rel;
                if bytes[j] == b'}' && j > i + 1 {
                    let name = body[i + 1..j].to_string();
                    if !slots.contains(&name) {
                        slots.push(name);
                    }
                    i = j + 1;
                    continue;
                }
            }
        }
        i += 1;
    }
    slots
}

/// Substitutes every slot with its bound value, verbatim. Substituted values
/// are not re-scanned, so braces inside values stay literal.
///
/// Errors with `MissingSlot` (first unbound slot in body order) when the
/// bindings do not cover the required slots, and `UnknownSlot` when a binding
/// names a slot the template does not declare.
pub fn render_prompt(
    template: &PromptTemplate,
    bindings: &BindingMap,
) -> Result<String, PromptError> {
    for name in bindings.keys() {
        if !template.required_slots.contains(name) {
            return Err(PromptError::UnknownSlot(name.clone()));
        }
    }
    for slot in slots_in_body(&template.body) {
        if !bindings.contains_key(&slot) {
            return Err(PromptError::MissingSlot(slot));
        }
    }
    let mut out = String::with_capacity(template.body.len());
    let body = &template.body;
    let bytes = body.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some(rel) = body[i + 1..].find(['{', '}', '\n']) {
                let j = i + 1 + rel;
                if bytes[j] == b'}' && j > i + 1 {
                    let name = &body[i + 1..j];
                    out.push_str(&bindings[name]);
                    i = j + 1;
                    continue;
                }
            }
        }
        let ch = body[i..].chars().next().expect("in-bounds char");
        out.push(ch);
        i += ch.len_utf8();
    }
    Ok(out)
}

/// The full set of stage templates, loaded from a manifest file.
///
/// Manifest format, one stage per line:
/// `stage = filename :: slot, slot, ...`
/// Blank lines and `#` comments are skipped. Filenames are resolved relative
/// to the manifest's directory.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    templates: BTreeMap<Stage, PromptTemplate>,
}

impl TemplateSet {
    pub fn load_manifest(manifest_path: impl AsRef<Path>) -> Result<Self, PromptError> {
        let manifest_path = manifest_path.as_ref();
        let text = read_file(manifest_path)?;
        let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
        let mut templates = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (stage_part, rest) = line.split_once('=').ok_or(PromptError::Manifest {
                line: line_no,
                reason: "expected `stage = filename :: slots`".into(),
            })?;
            let stage =
                Stage::from_token(stage_part.trim()).ok_or_else(|| PromptError::Manifest {
                    line: line_no,
                    reason: format!("unknown stage {:?}", stage_part.trim()),
                })?;
            let (file_part, slots_part) = rest.split_once("::").ok_or(PromptError::Manifest {
                line: line_no,
                reason: "expected `:: slot, slot` after the filename".into(),
            })?;
            let slots = slots_part
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty());
            let body = read_file(&dir.join(file_part.trim()))?;
            let template = PromptTemplate::new(stage, body, slots)?;
            if templates.insert(stage, template).is_some() {
                return Err(PromptError::Manifest {
                    line: line_no,
                    reason: format!("stage {stage} listed twice"),
                });
            }
        }
        Ok(TemplateSet { templates })
    }

    pub fn get(&self, stage: Stage) -> Result<&PromptTemplate, PromptError> {
        self.templates.get(&stage).ok_or_else(|| PromptError::Io {
            path: stage.to_string(),
            reason: "stage missing from the template manifest".into(),
        })
    }

    pub fn stages(&self) -> impl Iterator<Item = Stage> + '_ {
        self.templates.keys().copied()
    }
}

/// Few-shot example texts bound to the `{example}`/`{examples}` slots,
/// loaded from a `[stage]`-sectioned text file.
#[derive(Debug, Clone, Default)]
pub struct FewshotExamples {
    examples: BTreeMap<Stage, String>,
}

impl FewshotExamples {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PromptError> {
        let text = read_file(path.as_ref())?;
        let mut examples: BTreeMap<Stage, String> = BTreeMap::new();
        let mut current: Option<Stage> = None;
        let mut buffer = String::new();
        let flush =
            |current: &Option<Stage>, buffer: &mut String, map: &mut BTreeMap<Stage, String>| {
                if let Some(stage) = current {
                    map.insert(*stage, buffer.trim_end().to_string());
                }
                buffer.clear();
            };
        for line in text.lines() {
            let trimmed = line.trim();
            if trimmed.starts_with('[') && trimmed.ends_with(']') {
                flush(&current, &mut buffer, &mut examples);
                current = Stage::from_token(&trimmed[1..trimmed.len() - 1]);
                continue;
            }
            if current.is_some() {
                buffer.push_str(line);
                buffer.push('\n');
            }
        }
        flush(&current, &mut buffer, &mut examples);
        Ok(FewshotExamples { examples })
    }

    pub fn get(&self, stage: Stage) -> &str {
        self.examples.get(&stage).map(String::as_str).unwrap_or("")
    }

    /// Binds the few-shot slot (`examples` or `example`) when the template
    /// declares one; stages without a stored example bind an empty string.
    pub fn bind(&self, template: &PromptTemplate, bindings: &mut BindingMap) {
        for name in ["examples", "example"] {
            if template.required_slots.contains(name) {
                bindings.insert(name.to_string(), self.get(template.stage).to_string());
            }
        }
    }
}

fn read_file(path: &Path) -> Result<String, PromptError> {
    std::fs::read_to_string(path).map_err(|e| PromptError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}
