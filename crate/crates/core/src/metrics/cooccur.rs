//! Boolean sliding-window co-occurrence counts and the NPMI/UCI coherence
//! scores computed over them.
//!
//! Probabilities are window frequencies: `P(w)` is the fraction of windows
//! containing `w`, and `P(w1, w2)` the fraction containing both. A document
//! shorter than the window contributes a single window covering the whole
//! document; longer documents contribute `len − window + 1` windows sliding
//! by one token.

use std::collections::HashMap;

use super::MetricError;

/// Windowed word and pair counts over a tokenized corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceModel {
    pub window: usize,
    pub doc_count: usize,
    pub total_windows: u64,
    word_ids: HashMap<String, u32>,
    word_windows: Vec<u64>,
    pair_windows: HashMap<(u32, u32), u64>,
}

impl CooccurrenceModel {
    /// Number of windows containing the word (0 for unknown words).
    pub fn word_count(&self, word: &str) -> u64 {
        self.word_ids
            .get(word)
            .map(|&id| self.word_windows[id as usize])
            .unwrap_or(0)
    }

    /// Number of windows containing both words; symmetric in its arguments.
    /// For `w == w` this is the word's own window count.
    pub fn pair_count(&self, w1: &str, w2: &str) -> u64 {
        let (Some(&a), Some(&b)) = (self.word_ids.get(w1), self.word_ids.get(w2)) else {
            return 0;
        };
        if a == b {
            return self.word_windows[a as usize];
        }
        let key = (a.min(b), a.max(b));
        self.pair_windows.get(&key).copied().unwrap_or(0)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.word_count(word) > 0
    }

    pub fn p_word(&self, word: &str) -> f64 {
        self.word_count(word) as f64 / self.total_windows as f64
    }

    pub fn p_pair(&self, w1: &str, w2: &str) -> f64 {
        self.pair_count(w1, w2) as f64 / self.total_windows as f64
    }

    pub fn vocabulary_len(&self) -> usize {
        self.word_ids.len()
    }
}

/// Counts word and pair window frequencies over a tokenized corpus.
pub fn build_cooccurrence(
    corpus: &[Vec<String>],
    window: usize,
) -> Result<CooccurrenceModel, MetricError> {
    if window == 0 {
        return Err(MetricError::ZeroWindow);
    }
    if corpus.is_empty() || corpus.iter().all(|doc| doc.is_empty()) {
        return Err(MetricError::EmptyCorpus);
    }

    let mut word_ids: HashMap<String, u32> = HashMap::new();
    let mut word_windows: Vec<u64> = Vec::new();
    let mut pair_windows: HashMap<(u32, u32), u64> = HashMap::new();
    let mut total_windows: u64 = 0;
    let mut doc_count = 0usize;

    for doc in corpus {
        doc_count += 1;
        if doc.is_empty() {
            continue;
        }
        let ids: Vec<u32> = doc
            .iter()
            .map(|token| {
                *word_ids.entry(token.clone()).or_insert_with(|| {
                    word_windows.push(0);
                    (word_windows.len() - 1) as u32
                })
            })
            .collect();
        let spans: Vec<&[u32]> = if ids.len() <= window {
            vec![&ids[..]]
        } else {
            ids.windows(window).collect()
        };
        for span in spans {
            total_windows += 1;
            let mut present: Vec<u32> = span.to_vec();
            present.sort_unstable();
            present.dedup();
            for &id in &present {
                word_windows[id as usize] += 1;
            }
            for i in 0..present.len() {
                for j in (i + 1)..present.len() {
                    *pair_windows.entry((present[i], present[j])).or_insert(0) += 1;
                }
            }
        }
    }

    Ok(CooccurrenceModel {
        window,
        doc_count,
        total_windows,
        word_ids,
        word_windows,
        pair_windows,
    })
}

/// Normalized pointwise mutual information of a word pair:
/// `ln(P(w1,w2) / (P(w1) P(w2))) / −ln P(w1,w2)`, clamped to [-1, 1].
///
/// The joint probability is ε-smoothed only when the pair never co-occurs,
/// so independent pairs land on exactly 0 and perfectly co-occurring pairs
/// on exactly 1. Both words must be known to the model.
pub fn npmi(
    model: &CooccurrenceModel,
    w1: &str,
    w2: &str,
    epsilon: f64,
) -> Result<f64, MetricError> {
    for w in [w1, w2] {
        if !model.contains(w) {
            return Err(MetricError::UnknownWord(w.to_string()));
        }
    }
    let joint = match model.pair_count(w1, w2) {
        0 => epsilon,
        count => count as f64 / model.total_windows as f64,
    };
    if joint >= 1.0 {
        // both words appear in every window; the pair is as coupled as it gets
        return Ok(1.0);
    }
    let pmi = joint.ln() - model.p_word(w1).ln() - model.p_word(w2).ln();
    Ok((pmi / -joint.ln()).clamp(-1.0, 1.0))
}

/// Which pairwise statistic a topic coherence score averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceVariant {
    /// `(2 / N(N−1)) Σ_{i<j} ln((P(wi,wj) + ε) / (P(wi) P(wj)))`
    Uci,
    /// Mean pairwise [`npmi`].
    NpmiAvg,
}

/// Pairwise coherence over a topic's top words (natural log for UCI).
pub fn coherence(
    model: &CooccurrenceModel,
    topic: &[String],
    variant: CoherenceVariant,
    epsilon: f64,
) -> Result<f64, MetricError> {
    if topic.len() < 2 {
        return Err(MetricError::FewerThanTwoWords);
    }
    for w in topic {
        if !model.contains(w) {
            return Err(MetricError::UnknownWord(w.clone()));
        }
    }
    let n = topic.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += match variant {
                CoherenceVariant::Uci => {
                    let joint = model.p_pair(&topic[i], &topic[j]) + epsilon;
                    (joint / (model.p_word(&topic[i]) * model.p_word(&topic[j]))).ln()
                }
                CoherenceVariant::NpmiAvg => npmi(model, &topic[i], &topic[j], epsilon)?,
            };
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(sum / pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn doc(tokens: &[&str]) -> Vec<String> {
        tokens.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn single_window_corpus() {
        let model = build_cooccurrence(&[doc(&["a", "b"])], 2).unwrap();
        assert_eq!(model.total_windows, 1);
        assert_eq!(model.word_count("a"), 1);
        assert_eq!(model.pair_count("a", "b"), 1);
        assert_eq!(model.p_pair("a", "b"), 1.0);
    }

    #[test]
    fn words_in_separate_docs_never_pair() {
        let model = build_cooccurrence(&[doc(&["a"]), doc(&["b"])], 1).unwrap();
        assert_eq!(model.total_windows, 2);
        assert_eq!(model.pair_count("a", "b"), 0);
    }

    #[test]
    fn pair_counts_are_symmetric_and_bounded() {
        let model = build_cooccurrence(&[doc(&["a", "b", "a", "c", "b"])], 3).unwrap();
        assert_eq!(model.pair_count("a", "b"), model.pair_count("b", "a"));
        assert!(model.pair_count("a", "b") <= model.word_count("a").min(model.word_count("b")));
    }

    #[test]
    fn empty_corpus_is_invalid() {
        assert_eq!(
            build_cooccurrence(&[], 2).unwrap_err(),
            MetricError::EmptyCorpus
        );
        assert_eq!(
            build_cooccurrence(&[Vec::new()], 2).unwrap_err(),
            MetricError::EmptyCorpus
        );
    }

    #[test]
    fn npmi_perfect_pair_is_exactly_one() {
        // P(a) = P(b) = P(a,b) = 0.5 over two windows
        let model = build_cooccurrence(&[doc(&["a", "b"]), doc(&["c", "d"])], 2).unwrap();
        assert_eq!(npmi(&model, "a", "b", EPS).unwrap(), 1.0);
    }

    #[test]
    fn npmi_self_pair_is_one() {
        let model = build_cooccurrence(&[doc(&["a", "b", "a"])], 2).unwrap();
        assert_eq!(npmi(&model, "a", "a", EPS).unwrap(), 1.0);
    }

    #[test]
    fn npmi_independent_pair_is_zero() {
        // four windows: {a,b}, {a,c}, {d,b}, {d,c} → P(a)=P(b)=1/2, P(a,b)=1/4
        let corpus = [
            doc(&["a", "b"]),
            doc(&["a", "c"]),
            doc(&["d", "b"]),
            doc(&["d", "c"]),
        ];
        let model = build_cooccurrence(&corpus, 2).unwrap();
        assert!(npmi(&model, "a", "b", EPS).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn npmi_never_cooccurring_pair_matches_direct_formula() {
        let model = build_cooccurrence(&[doc(&["a", "b"]), doc(&["c", "d"])], 2).unwrap();
        let value = npmi(&model, "a", "c", EPS).unwrap();
        // exact counts: P(a) = P(c) = 0.5, joint smoothed to ε
        let expected = ((EPS.ln() - 0.5f64.ln() - 0.5f64.ln()) / -EPS.ln()).clamp(-1.0, 1.0);
        assert!((value - expected).abs() < 1e-6);
        assert!((-1.0..0.0).contains(&value));
    }

    #[test]
    fn npmi_rejects_unknown_words() {
        let model = build_cooccurrence(&[doc(&["a", "b"])], 2).unwrap();
        assert_eq!(
            npmi(&model, "a", "zzz", EPS).unwrap_err(),
            MetricError::UnknownWord("zzz".into())
        );
    }

    #[test]
    fn coherence_perfect_two_word_topic() {
        let model = build_cooccurrence(&[doc(&["a", "b"]), doc(&["c", "d"])], 2).unwrap();
        let topic = vec!["a".to_string(), "b".to_string()];
        assert_eq!(
            coherence(&model, &topic, CoherenceVariant::NpmiAvg, EPS).unwrap(),
            1.0
        );
    }

    #[test]
    fn coherence_requires_two_words() {
        let model = build_cooccurrence(&[doc(&["a", "b"])], 2).unwrap();
        assert_eq!(
            coherence(&model, &["a".to_string()], CoherenceVariant::Uci, EPS).unwrap_err(),
            MetricError::FewerThanTwoWords
        );
    }

    #[test]
    fn coherence_three_word_topic_matches_hand_computation() {
        // 10 windows from one 12-token document, window 3
        let tokens = doc(&["a", "b", "c", "a", "b", "x", "c", "a", "y", "b", "c", "a"]);
        let model = build_cooccurrence(&[tokens], 3).unwrap();
        assert_eq!(model.total_windows, 10);
        let topic: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();

        // exhaustive pairwise computation from the model's own counts
        let mut uci_sum = 0.0;
        let mut npmi_sum = 0.0;
        for (w1, w2) in [("a", "b"), ("a", "c"), ("b", "c")] {
            let p1 = model.p_word(w1);
            let p2 = model.p_word(w2);
            let joint = model.p_pair(w1, w2);
            uci_sum += ((joint + EPS) / (p1 * p2)).ln();
            npmi_sum += ((joint.ln() - p1.ln() - p2.ln()) / -joint.ln()).clamp(-1.0, 1.0);
        }
        let uci = coherence(&model, &topic, CoherenceVariant::Uci, EPS).unwrap();
        let npmi_avg = coherence(&model, &topic, CoherenceVariant::NpmiAvg, EPS).unwrap();
        assert!((uci - uci_sum / 3.0).abs() < 1e-12);
        assert!((npmi_avg - npmi_sum / 3.0).abs() < 1e-12);
    }

    #[test]
    fn uci_shrinks_with_epsilon_for_zero_joint_pairs() {
        let model = build_cooccurrence(&[doc(&["a", "b"]), doc(&["c", "d"])], 2).unwrap();
        let topic: Vec<String> = ["a", "c"].iter().map(|s| s.to_string()).collect();
        let loose = coherence(&model, &topic, CoherenceVariant::Uci, 1e-6).unwrap();
        let tight = coherence(&model, &topic, CoherenceVariant::Uci, 1e-12).unwrap();
        assert!(tight < loose);
    }
}
