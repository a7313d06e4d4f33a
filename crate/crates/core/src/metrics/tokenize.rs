//! Deterministic text segmentation feeding the co-occurrence and BLEU
//! metrics. Lowercasing is applied before stopword removal, so stopword
//! lists should be lowercase when lowercasing is on.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Segmentation scheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenScheme {
    /// Maximal runs of Unicode alphanumeric characters.
    UnicodeWords,
    /// `str::split_whitespace`; punctuation stays attached.
    Whitespace,
    /// Sliding character n-grams over the non-whitespace characters.
    CharacterNgram(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub scheme: TokenScheme,
    pub lowercase: bool,
    #[serde(default)]
    pub stopwords: BTreeSet<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            scheme: TokenScheme::UnicodeWords,
            lowercase: true,
            stopwords: BTreeSet::new(),
        }
    }
}

impl TokenizerConfig {
    pub fn new(scheme: TokenScheme, lowercase: bool, stopwords: BTreeSet<String>) -> Self {
        if let TokenScheme::CharacterNgram(n) = scheme {
            assert!(n >= 1, "character n-gram size must be at least 1");
        }
        TokenizerConfig {
            scheme,
            lowercase,
            stopwords,
        }
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        tokenize(text, self)
    }
}

pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    let raw: Vec<String> = match &config.scheme {
        TokenScheme::UnicodeWords => text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect(),
        TokenScheme::Whitespace => text.split_whitespace().map(str::to_string).collect(),
        TokenScheme::CharacterNgram(n) => {
            let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
            if chars.len() < *n {
                Vec::new()
            } else {
                chars.windows(*n).map(|w| w.iter().collect()).collect()
            }
        }
    };
    raw.into_iter()
        .map(|t| {
            if config.lowercase {
                t.to_lowercase()
            } else {
                t
            }
        })
        .filter(|t| !config.stopwords.contains(t))
        .collect()
}
