//! Uniform contracts for LLM completion and blog search, with live HTTP
//! adapters, a deterministic scripted provider for offline runs, and a
//! persistent response cache.
//!
//! Live adapter credentials come from the environment:
//! `WRITING_PATH_LLM_BASE_URL`, `WRITING_PATH_LLM_API_KEY`,
//! `WRITING_PATH_SEARCH_BASE_URL`, `WRITING_PATH_SEARCH_API_KEY`.

mod cache;
mod http;
mod scripted;

pub use cache::{CachedLlm, CachedSearch, ResponseCache};
pub use http::{HttpLlm, HttpSearch, RetryPolicy};
pub use scripted::{load_fixture_file, FixtureDocument, ScriptedLlm, ScriptedSearch};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use async_trait::async_trait;
use sha2::{Digest, Sha256};

use crate::domain::RetrievedDocument;

pub const ENV_LLM_BASE_URL: &str = "WRITING_PATH_LLM_BASE_URL";
pub const ENV_LLM_API_KEY: &str = "WRITING_PATH_LLM_API_KEY";
pub const ENV_SEARCH_BASE_URL: &str = "WRITING_PATH_SEARCH_BASE_URL";
pub const ENV_SEARCH_API_KEY: &str = "WRITING_PATH_SEARCH_API_KEY";

/// One completion request. `request_tag` is a stage label carried for
/// logging only; it does not affect caching.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub prompt: String,
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub request_tag: String,
}

impl CompletionRequest {
    pub fn new(
        prompt: impl Into<String>,
        model_id: impl Into<String>,
        temperature: f64,
        max_tokens: u32,
        request_tag: impl Into<String>,
    ) -> Result<Self, ProviderError> {
        let prompt = prompt.into();
        if prompt.trim().is_empty() {
            return Err(ProviderError::InvalidRequest("prompt is empty".into()));
        }
        if !(0.0..=2.0).contains(&temperature) {
            return Err(ProviderError::InvalidRequest(format!(
                "temperature {temperature} outside [0, 2]"
            )));
        }
        if max_tokens == 0 {
            return Err(ProviderError::InvalidRequest("max_tokens is 0".into()));
        }
        Ok(CompletionRequest {
            prompt,
            model_id: model_id.into(),
            temperature,
            max_tokens,
            request_tag: request_tag.into(),
        })
    }
}

/// A completion plus where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    pub text: String,
    pub provider_id: String,
    pub cached: bool,
    pub latency_ms: u64,
}

/// A search query; the pipeline always asks for the top-1 document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchQuery {
    pub query: String,
    pub top_k: u32,
}

impl SearchQuery {
    pub fn top1(query: impl Into<String>) -> Result<Self, SearchError> {
        SearchQuery::new(query, 1)
    }

    pub fn new(query: impl Into<String>, top_k: u32) -> Result<Self, SearchError> {
        let query = query.into();
        if query.trim().is_empty() {
            return Err(SearchError::InvalidQuery("query is empty".into()));
        }
        if top_k == 0 {
            return Err(SearchError::InvalidQuery("top_k is 0".into()));
        }
        Ok(SearchQuery { query, top_k })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("authentication rejected: {0}")]
    Auth(String),
    #[error("transient failures exhausted after {attempts} attempts: {last}")]
    TransientExhausted { attempts: u32, last: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("no results for query {0:?}")]
    NoResults(String),
    #[error("transport failure: {0}")]
    Transport(String),
}

/// LLM completion contract. Implementations must be safe for concurrent
/// invocation from multiple tasks.
#[async_trait]
pub trait LlmProvider: Send + Sync {
    async fn complete(
        &self,
        request: &CompletionRequest,
    ) -> Result<CompletionResult, ProviderError>;

    /// Short identifier recorded in results.
    fn id(&self) -> &str;
}

/// Blog search contract: the highest-ranked document for a query.
#[async_trait]
pub trait SearchProvider: Send + Sync {
    async fn search_top1(&self, query: &SearchQuery) -> Result<RetrievedDocument, SearchError>;
}

/// Stable content hash of a completion request, covering prompt, model,
/// temperature, and max_tokens — and excluding the logging tag, so retagged
/// requests share cache entries.
pub fn cache_key(request: &CompletionRequest) -> String {
    let mut hasher = Sha256::new();
    hasher.update((request.prompt.len() as u64).to_be_bytes());
    hasher.update(request.prompt.as_bytes());
    hasher.update((request.model_id.len() as u64).to_be_bytes());
    hasher.update(request.model_id.as_bytes());
    hasher.update(request.temperature.to_bits().to_be_bytes());
    hasher.update(u64::from(request.max_tokens).to_be_bytes());
    hex(&hasher.finalize())
}

/// Hash key for scripted LLM fixtures: the prompt text alone, so one fixture
/// file serves any model/temperature configuration.
pub fn prompt_hash(prompt: &str) -> String {
    hex(&Sha256::digest(prompt.as_bytes()))
}

/// Cache key for search responses.
pub fn search_cache_key(query: &SearchQuery) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"search:");
    hasher.update(query.query.as_bytes());
    hasher.update(u64::from(query.top_k).to_be_bytes());
    hex(&hasher.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Wrapper that counts how many requests reach the underlying provider.
/// Placed under the cache, the counters report true provider traffic.
pub struct CountingLlm {
    inner: Arc<dyn LlmProvider>,
    calls: Arc<AtomicUsize>,
}

impl CountingLlm {
    pub fn new(inner: Arc<dyn LlmProvider>) -> Self {
        CountingLlm {
            inner,
            calls: Arc::new(AtomicUsize::new(0)),
        }
    }

    pub fn counter(&self) -> Arc<AtomicUsize> {
        Arc::clone(&self.calls)
    }
}

#[async_trait]
impl LlmProvider for CountingLlm {
    async fn complete(
        &self,
        request: &CompletionRequest,
    ) -> Result<CompletionResult, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.complete(request).await
    }

    fn id(&self) -> &str {
        self.inner.id()
    }
}

/// Search twin of [`CountingLlm`].
pub struct CountingSearch {
    inner: Arc<dyn SearchProvider>,
    calls: Arc<AtomicUsize>,
}

impl CountingSearch {
    pub fn new(inner: Arc<dyn SearchProvider>) -> Self {
        CountingSearch {
            inner,
            calls: Arc::new(AtomicUsize::new(0)),
        }
    }

    pub fn counter(&self) -> Arc<AtomicUsize> {
        Arc::clone(&self.calls)
    }
}

#[async_trait]
impl SearchProvider for CountingSearch {
    async fn search_top1(&self, query: &SearchQuery) -> Result<RetrievedDocument, SearchError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.search_top1(query).await
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(prompt: &str, tag: &str, temperature: f64) -> CompletionRequest {
        CompletionRequest::new(prompt, "model-x", temperature, 256, tag).unwrap()
    }

    #[test]
    fn identical_requests_share_a_key() {
        assert_eq!(
            cache_key(&req("p", "a", 0.7)),
            cache_key(&req("p", "a", 0.7))
        );
    }

    #[test]
    fn request_tag_is_excluded_from_the_key() {
        assert_eq!(
            cache_key(&req("p", "s1", 0.7)),
            cache_key(&req("p", "s5", 0.7))
        );
    }

    #[test]
    fn temperature_is_included_in_the_key() {
        assert_ne!(
            cache_key(&req("p", "a", 0.0)),
            cache_key(&req("p", "a", 0.7))
        );
    }

    #[test]
    fn request_validation() {
        assert!(CompletionRequest::new(" ", "m", 0.7, 10, "t").is_err());
        assert!(CompletionRequest::new("p", "m", 2.5, 10, "t").is_err());
        assert!(CompletionRequest::new("p", "m", 0.7, 0, "t").is_err());
        assert!(SearchQuery::top1("").is_err());
    }
}
