//! Live adapter behavior against a local stub server: response parsing,
//! retry/backoff classification, auth failures, and rank-1 selection.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::post;
use axum::{Json, Router};
use serde_json::json;

use writing_path_core::providers::{
    CompletionRequest, HttpLlm, HttpSearch, LlmProvider, ProviderError, RetryPolicy, SearchError,
    SearchProvider, SearchQuery,
};

async fn spawn(router: Router) -> (String, tokio::task::JoinHandle<()>) {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let handle = tokio::spawn(async move {
        axum::serve(listener, router).await.unwrap();
    });
    (format!("http://{addr}"), handle)
}

fn request() -> CompletionRequest {
    CompletionRequest::new("say hi", "model-x", 0.2, 32, "s1").unwrap()
}

fn fast_retry() -> RetryPolicy {
    RetryPolicy {
        retries: 2,
        base_backoff: Duration::from_millis(1),
    }
}

#[test]
fn adapter_debug_output_redacts_credentials() {
    let llm = HttpLlm::new("http://example.invalid/v1", Some("sk-super-secret".into()));
    let search = HttpSearch::new("http://example.invalid/s", Some("sk-other-secret".into()));
    let printed = format!("{llm:?} {search:?}");
    assert!(!printed.contains("secret"));
    assert!(printed.contains("<redacted>"));
}

#[tokio::test]
async fn completion_parses_the_first_choice() {
    let router = Router::new().route(
        "/v1/chat",
        post(|Json(body): Json<serde_json::Value>| async move {
            assert_eq!(body["model"], "model-x");
            assert_eq!(body["messages"][0]["content"], "say hi");
            Json(json!({"choices": [{"message": {"role": "assistant", "content": "hi"}}]}))
        }),
    );
    let (base, server) = spawn(router).await;
    let llm = HttpLlm::new(format!("{base}/v1/chat"), Some("secret".into()));
    let result = llm.complete(&request()).await.unwrap();
    assert_eq!(result.text, "hi");
    assert!(!result.cached);
    server.abort();
}

#[tokio::test]
async fn transient_failures_are_retried_until_success() {
    let hits = Arc::new(AtomicUsize::new(0));
    let router = Router::new()
        .route(
            "/c",
            post(|State(hits): State<Arc<AtomicUsize>>| async move {
                if hits.fetch_add(1, Ordering::SeqCst) == 0 {
                    (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({}))).into_response()
                } else {
                    Json(json!({"choices": [{"message": {"content": "recovered"}}]}))
                        .into_response()
                }
            }),
        )
        .with_state(Arc::clone(&hits));
    let (base, server) = spawn(router).await;
    let llm = HttpLlm::new(format!("{base}/c"), None).with_retry(fast_retry());
    let result = llm.complete(&request()).await.unwrap();
    assert_eq!(result.text, "recovered");
    assert_eq!(hits.load(Ordering::SeqCst), 2);
    server.abort();
}

#[tokio::test]
async fn persistent_transient_failures_exhaust_retries() {
    let hits = Arc::new(AtomicUsize::new(0));
    let router = Router::new()
        .route(
            "/c",
            post(|State(hits): State<Arc<AtomicUsize>>| async move {
                hits.fetch_add(1, Ordering::SeqCst);
                StatusCode::SERVICE_UNAVAILABLE
            }),
        )
        .with_state(Arc::clone(&hits));
    let (base, server) = spawn(router).await;
    let llm = HttpLlm::new(format!("{base}/c"), None).with_retry(fast_retry());
    let err = llm.complete(&request()).await.unwrap_err();
    assert!(matches!(
        err,
        ProviderError::TransientExhausted { attempts: 3, .. }
    ));
    assert_eq!(hits.load(Ordering::SeqCst), 3);
    server.abort();
}

#[tokio::test]
async fn auth_rejection_is_not_retried() {
    let hits = Arc::new(AtomicUsize::new(0));
    let router = Router::new()
        .route(
            "/c",
            post(|State(hits): State<Arc<AtomicUsize>>| async move {
                hits.fetch_add(1, Ordering::SeqCst);
                StatusCode::UNAUTHORIZED
            }),
        )
        .with_state(Arc::clone(&hits));
    let (base, server) = spawn(router).await;
    let llm = HttpLlm::new(format!("{base}/c"), Some("bad-key".into())).with_retry(fast_retry());
    let err = llm.complete(&request()).await.unwrap_err();
    assert!(matches!(err, ProviderError::Auth(_)));
    assert_eq!(hits.load(Ordering::SeqCst), 1);
    server.abort();
}

#[tokio::test]
async fn malformed_payload_is_reported() {
    let router = Router::new().route("/c", post(|| async { Json(json!({"choices": []})) }));
    let (base, server) = spawn(router).await;
    let llm = HttpLlm::new(format!("{base}/c"), None);
    let err = llm.complete(&request()).await.unwrap_err();
    assert!(matches!(err, ProviderError::MalformedResponse(_)));
    server.abort();
}

#[tokio::test]
async fn search_returns_only_the_top_ranked_result() {
    let router = Router::new().route(
        "/s",
        post(|Json(body): Json<serde_json::Value>| async move {
            assert_eq!(body["query"], "Seoul food tour");
            Json(json!({
                "results": [
                    {"title": "first hit", "body": "the closest blog"},
                    {"title": "second hit", "body": "should be ignored"},
                ]
            }))
        }),
    );
    let (base, server) = spawn(router).await;
    let search = HttpSearch::new(format!("{base}/s"), None);
    let doc = search
        .search_top1(&SearchQuery::top1("Seoul food tour").unwrap())
        .await
        .unwrap();
    assert_eq!(doc.title, "first hit");
    assert_eq!(doc.rank, 1);
    server.abort();
}

#[tokio::test]
async fn empty_search_page_is_no_results() {
    let router = Router::new().route("/s", post(|| async { Json(json!({"results": []})) }));
    let (base, server) = spawn(router).await;
    let search = HttpSearch::new(format!("{base}/s"), None);
    let err = search
        .search_top1(&SearchQuery::top1("nothing").unwrap())
        .await
        .unwrap_err();
    assert!(matches!(err, SearchError::NoResults(_)));
    server.abort();
}

#[tokio::test]
async fn unreachable_search_endpoint_is_a_transport_error() {
    // bind-then-drop leaves a port with nothing listening
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let search = HttpSearch::new(format!("http://{addr}/s"), None);
    let err = search
        .search_top1(&SearchQuery::top1("q").unwrap())
        .await
        .unwrap_err();
    assert!(matches!(err, SearchError::Transport(_)));
}
