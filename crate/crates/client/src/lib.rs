//! Thin HTTP client for the writing-path service, plus the wire types the
//! service and its callers share.

pub mod types;

use serde::de::DeserializeOwned;
use serde::Serialize;

use types::*;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("service returned {status}: {message}")]
    Api { status: u16, message: String },
}

/// Client over one service base URL (e.g. `http://127.0.0.1:8787`).
#[derive(Debug, Clone)]
pub struct Client {
    base_url: String,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        Client {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub async fn health(&self) -> Result<HealthResponse, ClientError> {
        let url = format!("{}/healthz", self.base_url);
        let response = self
            .http
            .get(url)
            .send()
            .await
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        decode(response).await
    }

    pub async fn ingest(&self, request: &IngestRequest) -> Result<IngestResponse, ClientError> {
        self.post("/v1/ingest", request).await
    }

    pub async fn run(&self, request: &RunRequest) -> Result<RunResponse, ClientError> {
        self.post("/v1/run", request).await
    }

    pub async fn eval(&self, request: &EvalRequest) -> Result<EvalResponse, ClientError> {
        self.post("/v1/eval", request).await
    }

    pub async fn report(&self, request: &ReportRequest) -> Result<ReportResponse, ClientError> {
        self.post("/v1/report", request).await
    }

    pub async fn align(&self, request: &AlignRequest) -> Result<AlignResponse, ClientError> {
        self.post("/v1/align", request).await
    }

    async fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        path: &str,
        request: &Req,
    ) -> Result<Resp, ClientError> {
        let url = format!("{}{path}", self.base_url);
        let response = self
            .http
            .post(url)
            .json(request)
            .send()
            .await
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        decode(response).await
    }
}

async fn decode<Resp: DeserializeOwned>(response: reqwest::Response) -> Result<Resp, ClientError> {
    let status = response.status();
    let body = response
        .text()
        .await
        .map_err(|e| ClientError::Transport(e.to_string()))?;
    if !status.is_success() {
        let message = serde_json::from_str::<ErrorResponse>(&body)
            .map(|e| e.error)
            .unwrap_or(body);
        return Err(ClientError::Api {
            status: status.as_u16(),
            message,
        });
    }
    serde_json::from_str(&body).map_err(|e| ClientError::Transport(format!("invalid body: {e}")))
}
