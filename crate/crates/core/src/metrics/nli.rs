//! Logical alignment of an outline, judged pair by pair: each
//! (header, subheader) pair is posed to a judge model as a three-way
//! inference question, and the score is the fraction of pairs judged as
//! entailed. Only "entail" counts; neutral and contradict both miss.

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::domain::Outline;
use crate::prompts::{render_prompt, BindingMap, PromptTemplate};
use crate::providers::{CompletionRequest, LlmProvider};

/// Three-way judge verdict for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NliLabel {
    Entail,
    Neutral,
    Contradict,
}

impl NliLabel {
    /// Finds the earliest label keyword in a completion, case-insensitively.
    /// Tolerates inflections like "entailment" or "contradiction".
    fn parse(raw: &str) -> Result<NliLabel, MetricError> {
        let lowered = raw.to_lowercase();
        let candidates = [
            ("entail", NliLabel::Entail),
            ("neutral", NliLabel::Neutral),
            ("contradict", NliLabel::Contradict),
        ];
        candidates
            .iter()
            .filter_map(|(word, label)| lowered.find(word).map(|pos| (pos, *label)))
            .min_by_key(|(pos, _)| *pos)
            .map(|(_, label)| label)
            .ok_or_else(|| MetricError::JudgeParse(raw.trim().to_string()))
    }
}

/// Judge invocation settings for NLI scoring.
#[derive(Debug, Clone)]
pub struct NliJudgeConfig {
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Concurrent judge calls in flight.
    pub width: usize,
}

impl Default for NliJudgeConfig {
    fn default() -> Self {
        NliJudgeConfig {
            model_id: "gpt-4-turbo".into(),
            temperature: 0.0,
            max_tokens: 8,
            width: 4,
        }
    }
}

/// Alignment score plus the underlying counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NliReport {
    pub score: f64,
    pub entailed: usize,
    pub total: usize,
}

/// Renders the judge prompt for one (header, subheader) pair.
pub fn nli_prompt(
    template: &PromptTemplate,
    header: &str,
    subheader: &str,
) -> Result<String, MetricError> {
    let mut bindings = BindingMap::new();
    bindings.insert("premise".into(), header.to_string());
    bindings.insert("hypothesis".into(), subheader.to_string());
    Ok(render_prompt(template, &bindings)?)
}

/// Scores every (header, subheader) pair of an outline with the judge.
/// Header-only outlines have no pairs to score and are rejected, which is
/// why initial outlines report no alignment value.
pub async fn nli_alignment(
    outline: &Outline,
    judge: &dyn LlmProvider,
    template: &PromptTemplate,
    config: &NliJudgeConfig,
) -> Result<NliReport, MetricError> {
    let pairs = outline.header_subheader_pairs();
    if pairs.is_empty() {
        return Err(MetricError::NoPairs);
    }
    let prompts = pairs
        .iter()
        .map(|(header, sub)| nli_prompt(template, header, sub))
        .collect::<Result<Vec<_>, _>>()?;

    let calls: Vec<_> = prompts
        .into_iter()
        .map(|prompt| async move {
            let request = CompletionRequest::new(
                prompt,
                &config.model_id,
                config.temperature,
                config.max_tokens,
                "eval_nli",
            )?;
            let result = judge.complete(&request).await?;
            NliLabel::parse(&result.text)
        })
        .collect();
    let labels: Vec<Result<NliLabel, MetricError>> = stream::iter(calls)
        .buffer_unordered(config.width.max(1))
        .collect()
        .await;

    let mut entailed = 0usize;
    let mut total = 0usize;
    for label in labels {
        total += 1;
        if label? == NliLabel::Entail {
            entailed += 1;
        }
    }
    Ok(NliReport {
        score: entailed as f64 / total as f64,
        entailed,
        total,
    })
}
