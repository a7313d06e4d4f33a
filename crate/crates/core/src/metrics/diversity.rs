//! Topic diversity: the fraction of unique words among the top-k words of
//! all topics. Assumes a fixed k per topic, so builders truncate and the
//! scorer rejects short topics.

use std::collections::HashSet;

use super::MetricError;

/// One topic's label and its top words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicWords {
    pub label: String,
    pub top_words: Vec<String>,
}

/// A set of topics under a common k. Construction truncates longer word
/// lists to k; shorter lists are kept as-is and rejected later by
/// [`topic_diversity`] unless the caller shrank k to fit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicWordSets {
    pub k: usize,
    pub topics: Vec<TopicWords>,
}

impl TopicWordSets {
    pub fn truncated(k: usize, topics: Vec<TopicWords>) -> Self {
        let topics = topics
            .into_iter()
            .map(|mut t| {
                t.top_words.truncate(k);
                t
            })
            .collect();
        TopicWordSets { k, topics }
    }
}

/// `|unique words across all topics| / (k · T)`, in (0, 1].
pub fn topic_diversity(sets: &TopicWordSets) -> Result<f64, MetricError> {
    if sets.topics.is_empty() {
        return Err(MetricError::NoTopics);
    }
    for topic in &sets.topics {
        if topic.top_words.len() != sets.k {
            return Err(MetricError::KMismatch {
                topic: topic.label.clone(),
                expected: sets.k,
                got: topic.top_words.len(),
            });
        }
    }
    let unique: HashSet<&str> = sets
        .topics
        .iter()
        .flat_map(|t| t.top_words.iter().map(String::as_str))
        .collect();
    Ok(unique.len() as f64 / (sets.k * sets.topics.len()) as f64)
}
