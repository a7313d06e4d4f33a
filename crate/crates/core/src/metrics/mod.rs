//! Automatic outline evaluation: logical alignment (NLI), topic coherence
//! (NPMI/UCI), topic diversity, and redundancy (Self-BLEU), plus the shared
//! tokenization and co-occurrence substrate they run on.

mod bleu;
mod cooccur;
mod diversity;
mod nli;
mod outline;
mod tokenize;

pub use bleu::{bleu_score, self_bleu, self_bleu_tokens};
pub use cooccur::{build_cooccurrence, coherence, npmi, CoherenceVariant, CooccurrenceModel};
pub use diversity::{topic_diversity, TopicWordSets, TopicWords};
pub use nli::{nli_alignment, nli_prompt, NliJudgeConfig, NliLabel, NliReport};
pub use outline::{
    outline_coherence, outline_self_bleu, outline_topic_diversity, section_texts, section_topics,
    OutlineCoherence, OutlineMetricConfig, SelfBleuUnit,
};
pub use tokenize::{tokenize, TokenScheme, TokenizerConfig};

use crate::providers::ProviderError;

/// Failures across the metric operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("invalid input: empty corpus")]
    EmptyCorpus,
    #[error("invalid input: window must be at least 1")]
    ZeroWindow,
    #[error("unknown word {0:?}")]
    UnknownWord(String),
    #[error("invalid input: a topic needs at least two words")]
    FewerThanTwoWords,
    #[error("invalid input: no scorable sections")]
    NoScorableSections,
    #[error("invalid input: no topics")]
    NoTopics,
    #[error("invalid input: k mismatch — topic {topic:?} has {got} words, expected {expected}")]
    KMismatch {
        topic: String,
        expected: usize,
        got: usize,
    },
    #[error("invalid input: fewer than two sections")]
    FewerThanTwoSections,
    #[error("invalid input: outline has no header-subheader pairs")]
    NoPairs,
    #[error("judge answered with an unparseable label: {0:?}")]
    JudgeParse(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Prompt(#[from] crate::prompts::PromptError),
}
