//! Outline-level metric plumbing: turning an outline's sections into topics
//! over a reference corpus, and the coherence / diversity / Self-BLEU
//! wrappers the harness calls per outline.

use serde::{Deserialize, Serialize};

use super::{
    build_cooccurrence, coherence, self_bleu_tokens, topic_diversity, CoherenceVariant,
    CooccurrenceModel, MetricError, TokenizerConfig, TopicWordSets, TopicWords,
};
use crate::domain::Outline;

/// What counts as one Self-BLEU "section" of an outline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfBleuUnit {
    /// Header plus its subheaders as one text block.
    Block,
    /// The header line alone.
    Header,
}

/// Settings shared by the outline-level metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlineMetricConfig {
    pub tokenizer: TokenizerConfig,
    pub window: usize,
    pub top_k: usize,
    pub epsilon: f64,
    pub bleu_max_n: usize,
    pub bleu_epsilon: f64,
    pub self_bleu_unit: SelfBleuUnit,
}

impl Default for OutlineMetricConfig {
    fn default() -> Self {
        OutlineMetricConfig {
            tokenizer: TokenizerConfig::default(),
            window: 10,
            top_k: 10,
            epsilon: 1e-12,
            bleu_max_n: 4,
            bleu_epsilon: 1e-9,
            self_bleu_unit: SelfBleuUnit::Block,
        }
    }
}

/// Per-outline coherence result with skip diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlineCoherence {
    pub uci: f64,
    pub npmi: f64,
    pub scored_sections: usize,
    pub skipped_sections: usize,
}

/// One topic per section: the section's tokens (header plus subheaders,
/// stopword-filtered), restricted to words the model knows, ranked by
/// in-section frequency with ties broken by first occurrence, truncated
/// to `top_k`.
pub fn section_topics(
    outline: &Outline,
    model: &CooccurrenceModel,
    tokenizer: &TokenizerConfig,
    top_k: usize,
) -> Vec<TopicWords> {
    outline
        .sections
        .iter()
        .enumerate()
        .map(|(i, section)| {
            let mut order: Vec<String> = Vec::new();
            let mut counts: std::collections::HashMap<String, usize> =
                std::collections::HashMap::new();
            let mut text = section.header.clone();
            for sub in &section.subheaders {
                text.push('\n');
                text.push_str(sub);
            }
            for token in tokenizer.tokenize(&text) {
                if !model.contains(&token) {
                    continue;
                }
                if !counts.contains_key(&token) {
                    order.push(token.clone());
                }
                *counts.entry(token).or_insert(0) += 1;
            }
            let mut ranked: Vec<(usize, String)> = order.into_iter().enumerate().collect();
            ranked.sort_by(|(seen_a, a), (seen_b, b)| {
                counts[b]
                    .cmp(&counts[a])
                    .then(seen_a.cmp(seen_b))
                    .then(a.cmp(b))
            });
            TopicWords {
                label: format!("section-{}", i + 1),
                top_words: ranked.into_iter().map(|(_, t)| t).take(top_k).collect(),
            }
        })
        .collect()
}

/// The outline's Self-BLEU units as plain texts, per the configured unit.
pub fn section_texts(outline: &Outline, unit: SelfBleuUnit) -> Vec<String> {
    outline
        .sections
        .iter()
        .map(|section| match unit {
            SelfBleuUnit::Header => section.header.clone(),
            SelfBleuUnit::Block => {
                let mut text = section.header.clone();
                for sub in &section.subheaders {
                    text.push('\n');
                    text.push_str(sub);
                }
                text
            }
        })
        .collect()
}

/// Mean UCI and mean average-NPMI over the outline's sections, treating each
/// section as one topic against the reference corpus. Sections with fewer
/// than two corpus-known topic words are skipped and counted.
pub fn outline_coherence(
    outline: &Outline,
    corpus_texts: &[String],
    config: &OutlineMetricConfig,
) -> Result<OutlineCoherence, MetricError> {
    let corpus: Vec<Vec<String>> = corpus_texts
        .iter()
        .map(|t| config.tokenizer.tokenize(t))
        .collect();
    let model = build_cooccurrence(&corpus, config.window)?;
    let topics = section_topics(outline, &model, &config.tokenizer, config.top_k);

    let mut uci_sum = 0.0;
    let mut npmi_sum = 0.0;
    let mut scored = 0usize;
    let mut skipped = 0usize;
    for topic in &topics {
        if topic.top_words.len() < 2 {
            skipped += 1;
            continue;
        }
        uci_sum += coherence(
            &model,
            &topic.top_words,
            CoherenceVariant::Uci,
            config.epsilon,
        )?;
        npmi_sum += coherence(
            &model,
            &topic.top_words,
            CoherenceVariant::NpmiAvg,
            config.epsilon,
        )?;
        scored += 1;
    }
    if scored == 0 {
        return Err(MetricError::NoScorableSections);
    }
    Ok(OutlineCoherence {
        uci: uci_sum / scored as f64,
        npmi: npmi_sum / scored as f64,
        scored_sections: scored,
        skipped_sections: skipped,
    })
}

/// Topic diversity over the outline's section topics. The strict fixed-k
/// formula needs every topic at the same length, so k shrinks to the
/// shortest non-empty section when sections run short of `top_k` words;
/// empty sections are dropped. Returns the shrunk k alongside the score.
pub fn outline_topic_diversity(
    outline: &Outline,
    corpus_texts: &[String],
    config: &OutlineMetricConfig,
) -> Result<(f64, usize), MetricError> {
    let corpus: Vec<Vec<String>> = corpus_texts
        .iter()
        .map(|t| config.tokenizer.tokenize(t))
        .collect();
    let model = build_cooccurrence(&corpus, config.window)?;
    let topics: Vec<TopicWords> = section_topics(outline, &model, &config.tokenizer, config.top_k)
        .into_iter()
        .filter(|t| !t.top_words.is_empty())
        .collect();
    if topics.is_empty() {
        return Err(MetricError::NoTopics);
    }
    let k = topics
        .iter()
        .map(|t| t.top_words.len())
        .min()
        .expect("nonempty topics")
        .min(config.top_k);
    let sets = TopicWordSets::truncated(k, topics);
    Ok((topic_diversity(&sets)?, k))
}

/// Self-BLEU over the outline's sections (needs at least two).
pub fn outline_self_bleu(
    outline: &Outline,
    config: &OutlineMetricConfig,
) -> Result<f64, MetricError> {
    let tokenized: Vec<Vec<String>> = section_texts(outline, config.self_bleu_unit)
        .iter()
        .map(|t| config.tokenizer.tokenize(t))
        .collect();
    self_bleu_tokens(&tokenized, config.bleu_max_n, config.bleu_epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::OutlineSection;

    fn config() -> OutlineMetricConfig {
        OutlineMetricConfig {
            window: 5,
            top_k: 4,
            ..OutlineMetricConfig::default()
        }
    }

    fn corpus() -> Vec<String> {
        vec![
            "harbor ferries dock beside the fish market every morning".into(),
            "the fish market opens early and the harbor ferries wait".into(),
            "mountain trails need sturdy boots and patience".into(),
        ]
    }

    #[test]
    fn perfect_cooccurrence_scores_npmi_one() {
        // both sections reduce to the same always-co-occurring pair
        let outline = Outline::new(vec![
            OutlineSection::header_only("harbor ferries").unwrap(),
            OutlineSection::header_only("ferries harbor").unwrap(),
        ])
        .unwrap();
        let corpus = vec![
            "harbor ferries".to_string(),
            "harbor ferries again".to_string(),
        ];
        let mut cfg = config();
        cfg.window = 3;
        let result = outline_coherence(&outline, &corpus, &cfg).unwrap();
        assert_eq!(result.npmi, 1.0);
        assert_eq!(result.scored_sections, 2);
    }

    #[test]
    fn single_unknown_word_section_is_unscorable() {
        let outline = Outline::new(vec![OutlineSection::header_only("zeppelin").unwrap()]).unwrap();
        let err = outline_coherence(&outline, &corpus(), &config()).unwrap_err();
        assert_eq!(err, MetricError::NoScorableSections);
    }

    #[test]
    fn short_sections_are_skipped_and_counted() {
        let outline = Outline::new(vec![
            OutlineSection::header_only("harbor ferries market").unwrap(),
            OutlineSection::header_only("boots").unwrap(),
        ])
        .unwrap();
        let result = outline_coherence(&outline, &corpus(), &config()).unwrap();
        assert_eq!(result.scored_sections, 1);
        assert_eq!(result.skipped_sections, 1);
    }

    #[test]
    fn three_section_outline_matches_per_section_mean() {
        let outline = Outline::new(vec![
            OutlineSection::header_only("harbor ferries").unwrap(),
            OutlineSection::header_only("fish market").unwrap(),
            OutlineSection::header_only("mountain trails").unwrap(),
        ])
        .unwrap();
        let cfg = config();
        let result = outline_coherence(&outline, &corpus(), &cfg).unwrap();

        let tokenized: Vec<Vec<String>> =
            corpus().iter().map(|t| cfg.tokenizer.tokenize(t)).collect();
        let model = build_cooccurrence(&tokenized, cfg.window).unwrap();
        let mut uci_sum = 0.0;
        for words in [
            ["harbor", "ferries"],
            ["fish", "market"],
            ["mountain", "trails"],
        ] {
            let topic: Vec<String> = words.iter().map(|w| w.to_string()).collect();
            uci_sum += coherence(&model, &topic, CoherenceVariant::Uci, cfg.epsilon).unwrap();
        }
        assert!((result.uci - uci_sum / 3.0).abs() < 1e-12);
    }

    #[test]
    fn diversity_shrinks_k_to_shortest_section() {
        let outline = Outline::new(vec![
            OutlineSection::header_only("harbor ferries dock market").unwrap(),
            OutlineSection::header_only("mountain trails").unwrap(),
        ])
        .unwrap();
        let (score, k) = outline_topic_diversity(&outline, &corpus(), &config()).unwrap();
        assert_eq!(k, 2);
        assert_eq!(score, 1.0);
    }

    #[test]
    fn self_bleu_unit_switch_changes_the_texts() {
        let outline = Outline::new(vec![
            OutlineSection::new("Arrival", vec!["Airport rail".into()]).unwrap(),
            OutlineSection::new("Lunch", vec!["Markets".into()]).unwrap(),
        ])
        .unwrap();
        let blocks = section_texts(&outline, SelfBleuUnit::Block);
        let headers = section_texts(&outline, SelfBleuUnit::Header);
        assert_eq!(blocks[0], "Arrival\nAirport rail");
        assert_eq!(headers[0], "Arrival");
    }
}
