//! Live HTTP adapters.
//!
//! The LLM adapter speaks the common chat-completion POST shape
//! (`model`, `messages[{role,content}]`, `temperature`, `max_tokens`) against
//! a configurable endpoint, which covers the usual hosted models behind one
//! code path. The search adapter is a generic "query in, ranked documents
//! out" JSON POST; a vendor blog-search API is one concrete configuration,
//! not a special case.
//!
//! Credentials are sent as bearer tokens and are never logged or echoed into
//! traces; the `Debug` impls redact them.

use std::fmt;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde::Deserialize;
use serde_json::json;

use super::{
    CompletionRequest, CompletionResult, LlmProvider, ProviderError, SearchError, SearchProvider,
    SearchQuery, ENV_LLM_API_KEY, ENV_LLM_BASE_URL, ENV_SEARCH_API_KEY, ENV_SEARCH_BASE_URL,
};
use crate::domain::RetrievedDocument;

/// Retry schedule for transient completion failures: `retries` extra attempts
/// with exponentially doubling backoff starting at `base_backoff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub retries: u32,
    pub base_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        // 4 attempts total, sleeping 1s/2s/4s between them
        RetryPolicy {
            retries: 3,
            base_backoff: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    fn backoff(&self, failed_attempts: u32) -> Duration {
        self.base_backoff * 2u32.saturating_pow(failed_attempts.saturating_sub(1))
    }
}

/// Chat-completion HTTP adapter.
pub struct HttpLlm {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::Client,
    retry: RetryPolicy,
}

impl fmt::Debug for HttpLlm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpLlm")
            .field("endpoint", &self.endpoint)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("retry", &self.retry)
            .finish()
    }
}

impl HttpLlm {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Self {
        HttpLlm {
            endpoint: endpoint.into(),
            api_key,
            client: reqwest::Client::new(),
            retry: RetryPolicy::default(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    /// Builds the adapter from `WRITING_PATH_LLM_BASE_URL` /
    /// `WRITING_PATH_LLM_API_KEY`.
    pub fn from_env() -> Result<Self, ProviderError> {
        let endpoint = std::env::var(ENV_LLM_BASE_URL)
            .map_err(|_| ProviderError::InvalidRequest(format!("{ENV_LLM_BASE_URL} is not set")))?;
        Ok(HttpLlm::new(endpoint, std::env::var(ENV_LLM_API_KEY).ok()))
    }

    async fn attempt(&self, request: &CompletionRequest) -> Result<String, AttemptError> {
        let body = json!({
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        let mut builder = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().await.map_err(AttemptError::transport)?;
        let status = response.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(AttemptError::Auth(format!("status {status}")));
        }
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(AttemptError::Transient(format!("status {status}")));
        }
        if !status.is_success() {
            return Err(AttemptError::Malformed(format!("status {status}")));
        }
        let parsed: ChatResponse = response
            .json()
            .await
            .map_err(|e| AttemptError::Malformed(format!("invalid json: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| AttemptError::Malformed("response has no choices".into()))
    }
}

enum AttemptError {
    Transient(String),
    Auth(String),
    Malformed(String),
}

impl AttemptError {
    fn transport(err: reqwest::Error) -> Self {
        // connection-level trouble is worth retrying; everything else is not
        if err.is_timeout() || err.is_connect() || err.is_request() {
            AttemptError::Transient(err.to_string())
        } else {
            AttemptError::Malformed(err.to_string())
        }
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

#[async_trait]
impl LlmProvider for HttpLlm {
    async fn complete(
        &self,
        request: &CompletionRequest,
    ) -> Result<CompletionResult, ProviderError> {
        let started = Instant::now();
        let attempts = self.retry.retries + 1;
        let mut last_transient = String::new();
        for attempt in 1..=attempts {
            match self.attempt(request).await {
                Ok(text) => {
                    return Ok(CompletionResult {
                        text,
                        provider_id: self.id().to_string(),
                        cached: false,
                        latency_ms: started.elapsed().as_millis() as u64,
                    });
                }
                Err(AttemptError::Auth(msg)) => return Err(ProviderError::Auth(msg)),
                Err(AttemptError::Malformed(msg)) => {
                    return Err(ProviderError::MalformedResponse(msg));
                }
                Err(AttemptError::Transient(msg)) => {
                    tracing::warn!(attempt, tag = %request.request_tag, "transient completion failure: {msg}");
                    last_transient = msg;
                    if attempt < attempts {
                        tokio::time::sleep(self.retry.backoff(attempt)).await;
                    }
                }
            }
        }
        Err(ProviderError::TransientExhausted {
            attempts,
            last: last_transient,
        })
    }

    fn id(&self) -> &str {
        "http-llm"
    }
}

/// Generic ranked-document search adapter.
pub struct HttpSearch {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::Client,
}

impl fmt::Debug for HttpSearch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpSearch")
            .field("endpoint", &self.endpoint)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

#[derive(Deserialize)]
struct SearchResponse {
    results: Vec<SearchResult>,
}

#[derive(Deserialize)]
struct SearchResult {
    title: String,
    body: String,
}

impl HttpSearch {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Self {
        HttpSearch {
            endpoint: endpoint.into(),
            api_key,
            client: reqwest::Client::new(),
        }
    }

    /// Builds the adapter from `WRITING_PATH_SEARCH_BASE_URL` /
    /// `WRITING_PATH_SEARCH_API_KEY`.
    pub fn from_env() -> Result<Self, SearchError> {
        let endpoint = std::env::var(ENV_SEARCH_BASE_URL)
            .map_err(|_| SearchError::Transport(format!("{ENV_SEARCH_BASE_URL} is not set")))?;
        Ok(HttpSearch::new(
            endpoint,
            std::env::var(ENV_SEARCH_API_KEY).ok(),
        ))
    }
}

#[async_trait]
impl SearchProvider for HttpSearch {
    async fn search_top1(&self, query: &SearchQuery) -> Result<RetrievedDocument, SearchError> {
        let body = json!({"query": query.query, "top_k": query.top_k});
        let mut builder = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder
            .send()
            .await
            .map_err(|e| SearchError::Transport(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(SearchError::Transport(format!("status {status}")));
        }
        let parsed: SearchResponse = response
            .json()
            .await
            .map_err(|e| SearchError::Transport(format!("invalid json: {e}")))?;
        // only the highest-ranked document is used, whatever the page size
        let first = parsed
            .results
            .into_iter()
            .next()
            .ok_or_else(|| SearchError::NoResults(query.query.clone()))?;
        Ok(RetrievedDocument {
            query: query.query.clone(),
            title: first.title,
            body: first.body,
            rank: 1,
        })
    }
}
