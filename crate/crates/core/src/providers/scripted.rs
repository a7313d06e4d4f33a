//! Deterministic fixture-backed providers for offline, reproducible runs.
//!
//! LLM fixtures are keyed by the sha-256 of the prompt text; search fixtures
//! by the exact query string. Fixture files are line-delimited JSON
//! `{"key": ..., "response": ...}` records — a string response for
//! completions, a `{title, body}` object for search.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use super::{
    prompt_hash, CompletionRequest, CompletionResult, LlmProvider, ProviderError, SearchError,
    SearchProvider, SearchQuery,
};
use crate::domain::RetrievedDocument;

#[derive(Debug, Serialize, Deserialize)]
struct FixtureRecord {
    key: String,
    response: serde_json::Value,
}

/// A search fixture document before it is ranked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureDocument {
    pub title: String,
    pub body: String,
}

/// Reads a line-delimited `{key, response}` fixture file into a map.
pub fn load_fixture_file(
    path: impl AsRef<Path>,
) -> Result<HashMap<String, serde_json::Value>, std::io::Error> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: FixtureRecord = serde_json::from_str(line).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("fixture line {}: {e}", idx + 1),
            )
        })?;
        map.insert(record.key, record.response);
    }
    Ok(map)
}

/// Fixture-backed completion provider. Bit-deterministic: the same fixtures
/// and requests produce the same results in any invocation order.
#[derive(Default)]
pub struct ScriptedLlm {
    fixtures: HashMap<String, String>,
    calls: Arc<AtomicUsize>,
}

impl ScriptedLlm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, std::io::Error> {
        let mut scripted = ScriptedLlm::new();
        for (key, value) in load_fixture_file(path)? {
            let text = value.as_str().ok_or_else(|| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("llm fixture {key}: response must be a string"),
                )
            })?;
            scripted.fixtures.insert(key, text.to_string());
        }
        Ok(scripted)
    }

    /// Registers the completion for a prompt (hashed internally).
    pub fn script(&mut self, prompt: &str, response: impl Into<String>) {
        self.fixtures.insert(prompt_hash(prompt), response.into());
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }

    /// How many completions this provider has served.
    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Serializes the fixtures as `{key, response}` JSON lines, sorted by key.
    pub fn to_jsonl(&self) -> String {
        let mut keys: Vec<_> = self.fixtures.keys().collect();
        keys.sort();
        keys.into_iter()
            .map(|key| {
                serde_json::to_string(&FixtureRecord {
                    key: key.clone(),
                    response: serde_json::Value::String(self.fixtures[key].clone()),
                })
                .expect("fixture record serializes")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[async_trait]
impl LlmProvider for ScriptedLlm {
    async fn complete(
        &self,
        request: &CompletionRequest,
    ) -> Result<CompletionResult, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let key = prompt_hash(&request.prompt);
        let text = self.fixtures.get(&key).ok_or_else(|| {
            ProviderError::MalformedResponse(format!(
                "no fixture for prompt hash {key} (tag {:?})",
                request.request_tag
            ))
        })?;
        Ok(CompletionResult {
            text: text.clone(),
            provider_id: self.id().to_string(),
            cached: false,
            latency_ms: 0,
        })
    }

    fn id(&self) -> &str {
        "scripted"
    }
}

/// Fixture-backed search provider, keyed by exact query text.
#[derive(Default)]
pub struct ScriptedSearch {
    fixtures: HashMap<String, FixtureDocument>,
    calls: Arc<AtomicUsize>,
}

impl ScriptedSearch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, std::io::Error> {
        let mut scripted = ScriptedSearch::new();
        for (key, value) in load_fixture_file(path)? {
            let doc: FixtureDocument = serde_json::from_value(value).map_err(|e| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("search fixture {key}: {e}"),
                )
            })?;
            scripted.fixtures.insert(key, doc);
        }
        Ok(scripted)
    }

    pub fn script(&mut self, query: &str, doc: FixtureDocument) {
        self.fixtures.insert(query.to_string(), doc);
    }

    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn to_jsonl(&self) -> String {
        let mut keys: Vec<_> = self.fixtures.keys().collect();
        keys.sort();
        keys.into_iter()
            .map(|key| {
                serde_json::to_string(&FixtureRecord {
                    key: key.clone(),
                    response: serde_json::to_value(&self.fixtures[key])
                        .expect("fixture doc serializes"),
                })
                .expect("fixture record serializes")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[async_trait]
impl SearchProvider for ScriptedSearch {
    async fn search_top1(&self, query: &SearchQuery) -> Result<RetrievedDocument, SearchError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let doc = self
            .fixtures
            .get(&query.query)
            .ok_or_else(|| SearchError::NoResults(query.query.clone()))?;
        Ok(RetrievedDocument {
            query: query.query.clone(),
            title: doc.title.clone(),
            body: doc.body.clone(),
            rank: 1,
        })
    }
}
