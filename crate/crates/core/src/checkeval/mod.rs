//! Checklist-based writing evaluation: seven aspects, each decomposed into
//! binary sub-questions. A judge model answers one aspect's questions per
//! call; the aspect score is the yes-percentage and the overall score the
//! unweighted mean of the seven aspects.

mod kendall;

pub use kendall::kendall_tau;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};

use crate::domain::ComposedDocument;
use crate::prompts::{render_prompt, BindingMap, PromptError, PromptTemplate};
use crate::providers::{CompletionRequest, LlmProvider, ProviderError};

/// The seven writing aspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AspectName {
    LinguisticFluency,
    LogicalFluency,
    Coherence,
    Consistency,
    Complexity,
    Specificity,
    Interestingness,
}

impl AspectName {
    pub const ALL: [AspectName; 7] = [
        AspectName::LinguisticFluency,
        AspectName::LogicalFluency,
        AspectName::Coherence,
        AspectName::Consistency,
        AspectName::Complexity,
        AspectName::Specificity,
        AspectName::Interestingness,
    ];

    /// snake_case token used in files and JSON.
    pub fn as_str(&self) -> &'static str {
        match self {
            AspectName::LinguisticFluency => "linguistic_fluency",
            AspectName::LogicalFluency => "logical_fluency",
            AspectName::Coherence => "coherence",
            AspectName::Consistency => "consistency",
            AspectName::Complexity => "complexity",
            AspectName::Specificity => "specificity",
            AspectName::Interestingness => "interestingness",
        }
    }

    /// Human-readable name used inside judge prompts and reports.
    pub fn display_name(&self) -> &'static str {
        match self {
            AspectName::LinguisticFluency => "Linguistic Fluency",
            AspectName::LogicalFluency => "Logical Fluency",
            AspectName::Coherence => "Coherence",
            AspectName::Consistency => "Consistency",
            AspectName::Complexity => "Complexity",
            AspectName::Specificity => "Specificity",
            AspectName::Interestingness => "Interestingness",
        }
    }

    fn from_token(token: &str) -> Option<AspectName> {
        AspectName::ALL
            .iter()
            .copied()
            .find(|a| a.as_str() == token)
    }
}

impl fmt::Display for AspectName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A named group of questions inside an aspect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubAspect {
    pub name: String,
    pub questions: Vec<String>,
}

/// One aspect: its definition and its sub-aspects with questions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aspect {
    pub name: AspectName,
    pub definition: String,
    pub subaspects: Vec<SubAspect>,
}

impl Aspect {
    /// All questions in file order.
    pub fn questions(&self) -> Vec<&str> {
        self.subaspects
            .iter()
            .flat_map(|s| s.questions.iter().map(String::as_str))
            .collect()
    }
}

/// The full checklist. Loading enforces that exactly the seven aspects are
/// present, each with at least one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checklist {
    pub aspects: Vec<Aspect>,
}

impl Checklist {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CheckevalError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            CheckevalError::ChecklistFormat {
                line: 0,
                reason: format!("cannot read {}: {e}", path.as_ref().display()),
            }
        })?;
        Checklist::parse(&text)
    }

    /// Parses the indented plain-text checklist format: an unindented
    /// `name: definition` line per aspect, indented sub-aspect name lines,
    /// and further-indented `Q:` question lines.
    pub fn parse(text: &str) -> Result<Self, CheckevalError> {
        let mut aspects: Vec<Aspect> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let indented = raw.starts_with([' ', '\t']);
            let content = raw.trim();
            if let Some(question) = content.strip_prefix("Q:") {
                let question = question.trim();
                if question.is_empty() {
                    return Err(CheckevalError::ChecklistFormat {
                        line,
                        reason: "empty question".into(),
                    });
                }
                let sub = aspects
                    .last_mut()
                    .and_then(|a| a.subaspects.last_mut())
                    .ok_or(CheckevalError::ChecklistFormat {
                        line,
                        reason: "question before any sub-aspect".into(),
                    })?;
                sub.questions.push(question.to_string());
            } else if indented {
                let aspect = aspects.last_mut().ok_or(CheckevalError::ChecklistFormat {
                    line,
                    reason: "sub-aspect before any aspect".into(),
                })?;
                aspect.subaspects.push(SubAspect {
                    name: content.to_string(),
                    questions: Vec::new(),
                });
            } else {
                let (token, definition) =
                    content
                        .split_once(':')
                        .ok_or(CheckevalError::ChecklistFormat {
                            line,
                            reason: "aspect line must be `name: definition`".into(),
                        })?;
                let name = AspectName::from_token(token.trim()).ok_or_else(|| {
                    CheckevalError::ChecklistFormat {
                        line,
                        reason: format!("unknown aspect {:?}", token.trim()),
                    }
                })?;
                if aspects.iter().any(|a| a.name == name) {
                    return Err(CheckevalError::ChecklistFormat {
                        line,
                        reason: format!("duplicate aspect {name}"),
                    });
                }
                aspects.push(Aspect {
                    name,
                    definition: definition.trim().to_string(),
                    subaspects: Vec::new(),
                });
            }
        }
        for aspect in &aspects {
            if aspect.questions().is_empty() {
                return Err(CheckevalError::ChecklistFormat {
                    line: 0,
                    reason: format!("aspect {} has no questions", aspect.name),
                });
            }
        }
        if aspects.len() != AspectName::ALL.len() {
            return Err(CheckevalError::ChecklistFormat {
                line: 0,
                reason: format!(
                    "expected {} aspects, found {}",
                    AspectName::ALL.len(),
                    aspects.len()
                ),
            });
        }
        Ok(Checklist { aspects })
    }

    pub fn aspect(&self, name: AspectName) -> Option<&Aspect> {
        self.aspects.iter().find(|a| a.name == name)
    }
}

/// Boolean answers per aspect, positionally aligned with the checklist's
/// questions.
pub type AnswerSheet = BTreeMap<AspectName, Vec<bool>>;

/// Per-aspect percentages plus the overall mean for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WritingScorecard {
    pub aspect_scores: BTreeMap<AspectName, f64>,
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CheckevalError {
    #[error("checklist format error at line {line}: {reason}")]
    ChecklistFormat { line: usize, reason: String },
    #[error("writing text is empty")]
    EmptyWriting,
    #[error("answer count mismatch: expected {expected}, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("unrecognized answer token {0:?}")]
    UnrecognizedToken(String),
    #[error("no answers to score")]
    EmptyAnswers,
    #[error("expected exactly {expected} aspect scores, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("input lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("need at least two paired observations")]
    TooShort,
    #[error("rank correlation undefined: one input is entirely tied")]
    AllTied,
    #[error("aspect {aspect} failed: {source}")]
    AspectFailed {
        aspect: AspectName,
        #[source]
        source: Box<CheckevalError>,
    },
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// Renders the writing-evaluation prompt for one aspect: the template's
/// single `Q. {question}` line is expanded to one line per question, then
/// the aspect, definition, and writing slots are filled.
pub fn render_writing_eval_prompt(
    template: &PromptTemplate,
    aspect: &Aspect,
    writing: &str,
) -> Result<String, CheckevalError> {
    if writing.trim().is_empty() {
        return Err(CheckevalError::EmptyWriting);
    }
    let question_line = template
        .body
        .lines()
        .find(|line| line.contains("{question}"))
        .ok_or(PromptError::MissingSlot("question".into()))?
        .to_string();
    let expanded = aspect
        .questions()
        .iter()
        .map(|q| question_line.replace("{question}", q))
        .collect::<Vec<_>>()
        .join("\n");
    let body = template.body.replacen(&question_line, &expanded, 1);

    let slots: Vec<String> = template
        .required_slots
        .iter()
        .filter(|s| s.as_str() != "question")
        .cloned()
        .collect();
    let expanded_template = PromptTemplate::new(template.stage, body, slots)?;
    let mut bindings = BindingMap::new();
    bindings.insert("aspect".into(), aspect.name.display_name().to_string());
    bindings.insert("definition".into(), aspect.definition.clone());
    bindings.insert("writing".into(), writing.to_string());
    Ok(render_prompt(&expanded_template, &bindings)?)
}

/// Pulls per-question yes/no answers out of a judge completion. Answers are
/// the tokens after `A:` markers, matched case-insensitively, in line order.
pub fn parse_boolean_answers(raw: &str, expected: usize) -> Result<Vec<bool>, CheckevalError> {
    let mut answers = Vec::new();
    for line in raw.lines() {
        let Some(position) = find_answer_marker(line) else {
            continue;
        };
        let token: String = line[position..]
            .trim_start()
            .chars()
            .take_while(|c| c.is_alphanumeric())
            .collect();
        if token.eq_ignore_ascii_case("yes") {
            answers.push(true);
        } else if token.eq_ignore_ascii_case("no") {
            answers.push(false);
        } else {
            return Err(CheckevalError::UnrecognizedToken(token));
        }
    }
    if answers.len() != expected {
        return Err(CheckevalError::CountMismatch {
            expected,
            got: answers.len(),
        });
    }
    Ok(answers)
}

/// Byte offset just past the last standalone `A:`/`a:` marker on the line.
fn find_answer_marker(line: &str) -> Option<usize> {
    let bytes = line.as_bytes();
    let mut found = None;
    for i in 0..bytes.len().saturating_sub(1) {
        if (bytes[i] == b'A' || bytes[i] == b'a') && bytes[i + 1] == b':' {
            let standalone = i == 0 || !bytes[i - 1].is_ascii_alphanumeric();
            if standalone {
                found = Some(i + 2);
            }
        }
    }
    found
}

/// Percentage of positive answers, in [0, 100].
pub fn aspect_score(answers: &[bool]) -> Result<f64, CheckevalError> {
    if answers.is_empty() {
        return Err(CheckevalError::EmptyAnswers);
    }
    let positive = answers.iter().filter(|a| **a).count();
    Ok(100.0 * positive as f64 / answers.len() as f64)
}

/// Arithmetic mean of exactly seven aspect scores.
pub fn overall_score(aspect_scores: &[f64]) -> Result<f64, CheckevalError> {
    if aspect_scores.len() != AspectName::ALL.len() {
        return Err(CheckevalError::WrongArity {
            expected: AspectName::ALL.len(),
            got: aspect_scores.len(),
        });
    }
    Ok(aspect_scores.iter().sum::<f64>() / aspect_scores.len() as f64)
}

/// Judge settings for writing evaluation.
#[derive(Debug, Clone)]
pub struct WritingJudgeConfig {
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Concurrent aspect calls in flight.
    pub width: usize,
}

impl Default for WritingJudgeConfig {
    fn default() -> Self {
        WritingJudgeConfig {
            model_id: "gpt-4-turbo".into(),
            temperature: 0.0,
            max_tokens: 1024,
            width: 4,
        }
    }
}

/// Scores a document against the checklist: one judge call per aspect,
/// answers parsed positionally, aspect percentages averaged into the
/// overall score. Failures carry the aspect they happened in.
pub async fn evaluate_writing(
    document: &ComposedDocument,
    checklist: &Checklist,
    judge: &dyn LlmProvider,
    template: &PromptTemplate,
    config: &WritingJudgeConfig,
) -> Result<WritingScorecard, CheckevalError> {
    if document.full_text.trim().is_empty() {
        return Err(CheckevalError::EmptyWriting);
    }
    let judgments: Vec<_> = checklist
        .aspects
        .iter()
        .map(|aspect| async move {
            let score = judge_aspect(document, aspect, judge, template, config).await;
            (aspect.name, score)
        })
        .collect();
    let outcomes: Vec<(AspectName, Result<f64, CheckevalError>)> = stream::iter(judgments)
        .buffer_unordered(config.width.max(1))
        .collect()
        .await;

    let mut aspect_scores = BTreeMap::new();
    for (name, outcome) in outcomes {
        let score = outcome.map_err(|source| CheckevalError::AspectFailed {
            aspect: name,
            source: Box::new(source),
        })?;
        aspect_scores.insert(name, score);
    }
    let scores: Vec<f64> = AspectName::ALL
        .iter()
        .map(|name| aspect_scores[name])
        .collect();
    Ok(WritingScorecard {
        overall: overall_score(&scores)?,
        aspect_scores,
    })
}

async fn judge_aspect(
    document: &ComposedDocument,
    aspect: &Aspect,
    judge: &dyn LlmProvider,
    template: &PromptTemplate,
    config: &WritingJudgeConfig,
) -> Result<f64, CheckevalError> {
    let prompt = render_writing_eval_prompt(template, aspect, &document.full_text)?;
    let request = CompletionRequest::new(
        prompt,
        &config.model_id,
        config.temperature,
        config.max_tokens,
        "eval_writing",
    )?;
    let result = judge.complete(&request).await?;
    let answers = parse_boolean_answers(&result.text, aspect.questions().len())?;
    aspect_score(&answers)
}
