//! HTTP service exposing the pipeline's operations over JSON endpoints:
//!
//! - `GET  /healthz` — liveness
//! - `POST /v1/ingest` — validate a seed file
//! - `POST /v1/run` — execute an experiment from a run config
//! - `POST /v1/eval` — evaluate a completed run directory
//! - `POST /v1/report` — emit aggregate report files
//! - `POST /v1/align` — align human scores against a run
//!
//! Providers come from fixture files when a request names a scripted
//! directory, otherwise from the `WRITING_PATH_*` environment variables.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::net::TcpListener;

use writing_path_client::types::*;
use writing_path_core::domain::RunMode;
use writing_path_core::harness::{
    align_human_scores, emit_report, evaluate_run, ingest_seeds, run_experiment, ExperimentConfig,
    HarnessError, ReportFormat,
};
use writing_path_core::providers::{
    HttpLlm, HttpSearch, LlmProvider, ScriptedLlm, ScriptedSearch, SearchProvider,
};

/// Builds the service router.
pub fn router() -> Router {
    Router::new()
        .route("/healthz", get(health))
        .route("/v1/ingest", post(ingest))
        .route("/v1/run", post(run))
        .route("/v1/eval", post(eval))
        .route("/v1/report", post(report))
        .route("/v1/align", post(align))
}

/// Serves the router on an already-bound listener until the task is aborted.
pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router()).await
}

struct ApiFailure {
    status: StatusCode,
    message: String,
}

impl IntoResponse for ApiFailure {
    fn into_response(self) -> Response {
        let body = Json(ErrorResponse {
            error: self.message,
        });
        (self.status, body).into_response()
    }
}

impl From<HarnessError> for ApiFailure {
    fn from(err: HarnessError) -> Self {
        let status = match &err {
            HarnessError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiFailure {
            status,
            message: err.to_string(),
        }
    }
}

fn bad_request(message: impl Into<String>) -> ApiFailure {
    ApiFailure {
        status: StatusCode::BAD_REQUEST,
        message: message.into(),
    }
}

async fn health() -> Json<HealthResponse> {
    Json(HealthResponse {
        status: "ok".into(),
    })
}

async fn ingest(Json(request): Json<IngestRequest>) -> Result<Json<IngestResponse>, ApiFailure> {
    let seeds = ingest_seeds(&request.seeds_path).map_err(HarnessError::from)?;
    let mut domains = std::collections::BTreeMap::new();
    for seed in &seeds {
        *domains.entry(seed.domain.to_string()).or_insert(0) += 1;
    }
    Ok(Json(IngestResponse {
        count: seeds.len(),
        domains,
        ids: seeds.into_iter().map(|s| s.id).collect(),
    }))
}

async fn run(Json(request): Json<RunRequest>) -> Result<Json<RunResponse>, ApiFailure> {
    let mut config = ExperimentConfig::load(Path::new(&request.config_path))?;
    if !request.modes.is_empty() {
        let modes = request
            .modes
            .iter()
            .map(|m| m.parse::<RunMode>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(bad_request)?;
        let mut ordered = RunMode::ALL.to_vec();
        ordered.retain(|m| modes.contains(m));
        config.modes = ordered;
    }
    if let Some(cache_dir) = &request.cache_dir {
        config.cache_dir = Some(PathBuf::from(cache_dir));
    }
    let (llm, search) = build_providers(request.scripted_dir.as_deref())?;
    let run = run_experiment(&config, llm, search).await?;
    Ok(Json(RunResponse {
        run_dir: config.output_dir.display().to_string(),
        traces: run.traces.len(),
        failures: run
            .failures
            .iter()
            .map(|f| FailureDto {
                seed_id: f.seed_id.clone(),
                mode: f.mode.to_string(),
                stage: f.stage.clone(),
                message: f.message.clone(),
            })
            .collect(),
        llm_calls: run.stats.llm_calls,
        search_calls: run.stats.search_calls,
    }))
}

async fn eval(Json(request): Json<EvalRequest>) -> Result<Json<EvalResponse>, ApiFailure> {
    let judge = build_llm(request.scripted_dir.as_deref())?;
    let output = evaluate_run(Path::new(&request.run_dir), judge).await?;
    Ok(Json(EvalResponse {
        outline_reports: output.outline_reports.len(),
        scorecards: output.scorecards.len(),
        notes: output.notes,
    }))
}

async fn report(Json(request): Json<ReportRequest>) -> Result<Json<ReportResponse>, ApiFailure> {
    let format: ReportFormat = request.format.parse().map_err(bad_request)?;
    let files = emit_report(Path::new(&request.run_dir), format)?;
    Ok(Json(ReportResponse {
        files: files.iter().map(|f| f.display().to_string()).collect(),
    }))
}

async fn align(Json(request): Json<AlignRequest>) -> Result<Json<AlignResponse>, ApiFailure> {
    let ratio = request.max_unmatched_ratio.unwrap_or(0.5);
    let report = align_human_scores(
        Path::new(&request.run_dir),
        Path::new(&request.human_csv),
        ratio,
    )?;
    Ok(Json(AlignResponse {
        aligned: report.aligned.len(),
        unmatched: report
            .unmatched
            .iter()
            .map(|u| format!("line {}: {}", u.line, u.reason))
            .collect(),
        taus: report.taus,
        skipped: report.skipped,
    }))
}

type ProviderPair = (Arc<dyn LlmProvider>, Arc<dyn SearchProvider>);

fn build_providers(scripted_dir: Option<&str>) -> Result<ProviderPair, ApiFailure> {
    match scripted_dir {
        Some(dir) => {
            let dir = Path::new(dir);
            let llm = ScriptedLlm::from_file(dir.join("llm.jsonl"))
                .map_err(|e| bad_request(format!("scripted llm fixtures: {e}")))?;
            let search = ScriptedSearch::from_file(dir.join("search.jsonl"))
                .map_err(|e| bad_request(format!("scripted search fixtures: {e}")))?;
            Ok((Arc::new(llm), Arc::new(search)))
        }
        None => {
            let llm = HttpLlm::from_env().map_err(|e| bad_request(e.to_string()))?;
            let search = HttpSearch::from_env().map_err(|e| bad_request(e.to_string()))?;
            Ok((Arc::new(llm), Arc::new(search)))
        }
    }
}

fn build_llm(scripted_dir: Option<&str>) -> Result<Arc<dyn LlmProvider>, ApiFailure> {
    match scripted_dir {
        Some(dir) => {
            let llm = ScriptedLlm::from_file(Path::new(dir).join("llm.jsonl"))
                .map_err(|e| bad_request(format!("scripted llm fixtures: {e}")))?;
            Ok(Arc::new(llm))
        }
        None => Ok(Arc::new(
            HttpLlm::from_env().map_err(|e| bad_request(e.to_string()))?,
        )),
    }
}
