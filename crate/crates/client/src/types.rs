//! Request/response bodies for the service endpoints. Paths travel as
//! strings; the service and its clients share a filesystem.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestRequest {
    pub seeds_path: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestResponse {
    pub count: usize,
    /// Seed count per domain.
    pub domains: BTreeMap<String, usize>,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRequest {
    pub config_path: String,
    /// Overrides the config's mode list when nonempty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<String>,
    /// Directory holding `llm.jsonl` / `search.jsonl` fixtures; when set the
    /// run uses scripted providers instead of the live adapters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scripted_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureDto {
    pub seed_id: String,
    pub mode: String,
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResponse {
    pub run_dir: String,
    pub traces: usize,
    pub failures: Vec<FailureDto>,
    /// Requests that reached the underlying providers (cache hits excluded).
    pub llm_calls: usize,
    pub search_calls: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRequest {
    pub run_dir: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scripted_dir: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalResponse {
    pub outline_reports: usize,
    pub scorecards: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRequest {
    pub run_dir: String,
    /// `tsv` or `markdown`.
    pub format: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportResponse {
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlignRequest {
    pub run_dir: String,
    pub human_csv: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_unmatched_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlignResponse {
    pub aligned: usize,
    pub unmatched: Vec<String>,
    pub taus: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
}
