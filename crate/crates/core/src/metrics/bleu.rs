//! Self-BLEU redundancy: each section is scored as a BLEU hypothesis against
//! all of its sibling sections as references, and the scores are averaged.
//! Higher means more internal repetition.
//!
//! BLEU here is the standard corpus-style score for a single hypothesis:
//! clipped modified n-gram precisions for orders 1..max_n, their geometric
//! mean, and a brevity penalty against the closest reference length (ties
//! broken toward the shorter reference). Two conventions are pinned down for
//! short texts: the order range is capped at the hypothesis length (so
//! identical short sections still score 1.0), and an order with zero matches
//! contributes ε instead of collapsing the whole score to zero.

use std::collections::HashMap;

use super::{MetricError, TokenizerConfig};

/// Multi-reference BLEU for one hypothesis, in [0, 1].
pub fn bleu_score(
    hypothesis: &[String],
    references: &[&[String]],
    max_n: usize,
    epsilon: f64,
) -> f64 {
    let hyp_len = hypothesis.len();
    if hyp_len == 0 || references.is_empty() || max_n == 0 {
        return 0.0;
    }

    // closest reference length; ties go to the shorter one
    let ref_len = references
        .iter()
        .map(|r| r.len())
        .min_by_key(|&len| (len.abs_diff(hyp_len), len))
        .expect("nonempty references");
    let brevity_penalty = if hyp_len > ref_len {
        1.0
    } else if hyp_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };

    let order_cap = max_n.min(hyp_len);
    let mut log_sum = 0.0;
    for n in 1..=order_cap {
        let hyp_grams = ngram_counts(hypothesis, n);
        let total: u64 = (hyp_len - n + 1) as u64;
        let mut matched: u64 = 0;
        for (gram, &count) in &hyp_grams {
            let best_ref = references
                .iter()
                .map(|r| ngram_count_of(r, gram, n))
                .max()
                .unwrap_or(0);
            matched += count.min(best_ref);
        }
        let precision = if matched == 0 {
            epsilon
        } else {
            matched as f64 / total as f64
        };
        log_sum += precision.ln();
    }
    brevity_penalty * (log_sum / order_cap as f64).exp()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}

fn ngram_count_of(tokens: &[String], gram: &[String], n: usize) -> u64 {
    if tokens.len() < n {
        return 0;
    }
    tokens.windows(n).filter(|w| *w == gram).count() as u64
}

/// Mean BLEU of every section against its siblings, ×100. The per-section
/// scores are sorted before averaging, so the result is exactly invariant
/// under permutations of the section list.
pub fn self_bleu_tokens(
    sections: &[Vec<String>],
    max_n: usize,
    epsilon: f64,
) -> Result<f64, MetricError> {
    if sections.len() < 2 {
        return Err(MetricError::FewerThanTwoSections);
    }
    let mut scores: Vec<f64> = (0..sections.len())
        .map(|i| {
            let references: Vec<&[String]> = sections
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, s)| s.as_slice())
                .collect();
            bleu_score(&sections[i], &references, max_n, epsilon)
        })
        .collect();
    scores.sort_by(f64::total_cmp);
    Ok(scores.iter().sum::<f64>() / scores.len() as f64 * 100.0)
}

/// Tokenizing wrapper over [`self_bleu_tokens`].
pub fn self_bleu(
    sections: &[String],
    tokenizer: &TokenizerConfig,
    max_n: usize,
    epsilon: f64,
) -> Result<f64, MetricError> {
    let tokenized: Vec<Vec<String>> = sections.iter().map(|s| tokenizer.tokenize(s)).collect();
    self_bleu_tokens(&tokenized, max_n, epsilon)
}
