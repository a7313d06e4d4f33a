//! Persistent response cache.
//!
//! Entries are content-addressed: one JSON file per key under the cache
//! directory, so cached runs stay inspectable and replayable. An in-memory
//! map fronts the directory; a cache without a directory is memory-only,
//! which is how the runner shares stage prefixes across modes within one
//! process. Writes go through a temp file + rename; concurrent writers for
//! the same key produce identical content, so last-writer-wins is harmless.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::sync::Mutex;
use std::time::Instant;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use super::{
    cache_key, search_cache_key, CompletionRequest, CompletionResult, LlmProvider, ProviderError,
    SearchError, SearchProvider, SearchQuery,
};
use crate::domain::RetrievedDocument;

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    response: serde_json::Value,
}

/// Two-level (memory + optional directory) response store.
pub struct ResponseCache {
    memory: Mutex<HashMap<String, serde_json::Value>>,
    dir: Option<PathBuf>,
}

impl ResponseCache {
    pub fn memory_only() -> Self {
        ResponseCache {
            memory: Mutex::new(HashMap::new()),
            dir: None,
        }
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(ResponseCache {
            memory: Mutex::new(HashMap::new()),
            dir: Some(dir),
        })
    }

    fn get(&self, key: &str) -> Option<serde_json::Value> {
        if let Some(hit) = self.memory.lock().expect("cache lock").get(key) {
            return Some(hit.clone());
        }
        let dir = self.dir.as_ref()?;
        let path = dir.join(format!("{key}.json"));
        let text = std::fs::read_to_string(path).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        self.memory
            .lock()
            .expect("cache lock")
            .insert(key.to_string(), entry.response.clone());
        Some(entry.response)
    }

    fn put(&self, key: &str, response: serde_json::Value) {
        self.memory
            .lock()
            .expect("cache lock")
            .insert(key.to_string(), response.clone());
        if let Some(dir) = &self.dir {
            let entry = CacheEntry {
                key: key.to_string(),
                response,
            };
            if let Ok(json) = serde_json::to_string_pretty(&entry) {
                let tmp = dir.join(format!("{key}.json.tmp"));
                let path = dir.join(format!("{key}.json"));
                if std::fs::write(&tmp, json).is_ok() {
                    let _ = std::fs::rename(&tmp, &path);
                }
            }
        }
    }
}

/// Caching wrapper for an LLM provider. On a hit the underlying provider is
/// never invoked and the result is flagged `cached`.
pub struct CachedLlm {
    inner: Arc<dyn LlmProvider>,
    cache: Arc<ResponseCache>,
}

impl CachedLlm {
    pub fn new(inner: Arc<dyn LlmProvider>, cache: Arc<ResponseCache>) -> Self {
        CachedLlm { inner, cache }
    }
}

#[async_trait]
impl LlmProvider for CachedLlm {
    async fn complete(
        &self,
        request: &CompletionRequest,
    ) -> Result<CompletionResult, ProviderError> {
        let started = Instant::now();
        let key = cache_key(request);
        if let Some(value) = self.cache.get(&key) {
            if let Some(text) = value.as_str() {
                return Ok(CompletionResult {
                    text: text.to_string(),
                    provider_id: self.inner.id().to_string(),
                    cached: true,
                    latency_ms: started.elapsed().as_millis() as u64,
                });
            }
        }
        let result = self.inner.complete(request).await?;
        self.cache
            .put(&key, serde_json::Value::String(result.text.clone()));
        Ok(result)
    }

    fn id(&self) -> &str {
        self.inner.id()
    }
}

/// Caching wrapper for a search provider, so warmed caches replay full runs
/// without any provider traffic.
pub struct CachedSearch {
    inner: Arc<dyn SearchProvider>,
    cache: Arc<ResponseCache>,
}

impl CachedSearch {
    pub fn new(inner: Arc<dyn SearchProvider>, cache: Arc<ResponseCache>) -> Self {
        CachedSearch { inner, cache }
    }
}

#[async_trait]
impl SearchProvider for CachedSearch {
    async fn search_top1(&self, query: &SearchQuery) -> Result<RetrievedDocument, SearchError> {
        let key = search_cache_key(query);
        if let Some(value) = self.cache.get(&key) {
            if let Ok(doc) = serde_json::from_value::<RetrievedDocument>(value) {
                return Ok(doc);
            }
        }
        let doc = self.inner.search_top1(query).await?;
        if let Ok(value) = serde_json::to_value(&doc) {
            self.cache.put(&key, value);
        }
        Ok(doc)
    }
}
