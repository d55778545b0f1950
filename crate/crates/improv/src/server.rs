//! HTTP chat API.
//!
//! * `POST /api/chat[?debug=1]` with `{"session_id": "...", "message": "..."}`
//! * `GET /api/health`
//!
//! The engine is shared read-only. Each session sits behind its own mutex, so
//! requests for different sessions run concurrently while turns within one
//! session are serialized.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use improv_core::engine::{Engine, FinalResponse};
use improv_core::ranker::RankedCandidate;
use improv_core::trigger::{ChatSession, Turn};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::error::{ImprovError, Result};

#[derive(Debug, Clone, Deserialize)]
pub struct ChatRequest {
    pub session_id: String,
    pub message: String,
}

/// Wire form of a reply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatReply {
    pub reply: String,
    pub first_response: String,
    pub improv_response: Option<String>,
    pub triggered: bool,
    pub eligible: bool,
    pub debug: Option<Vec<RankedCandidate>>,
}

impl ChatReply {
    pub fn new(resp: FinalResponse, with_debug: bool) -> Self {
        Self {
            reply: resp.reply,
            first_response: resp.first_response,
            improv_response: resp.improv_response,
            triggered: resp.trigger.triggered,
            eligible: resp.trigger.eligible,
            // A non-triggered turn with debug on reports an empty candidate list.
            debug: with_debug.then(|| resp.debug.unwrap_or_default()),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct ChatParams {
    pub debug: Option<String>,
}

impl ChatParams {
    fn debug(&self) -> bool {
        matches!(self.debug.as_deref(), Some("1" | "true" | "yes"))
    }
}

pub struct AppState {
    engine: Engine,
    sessions: Mutex<HashMap<String, Arc<Mutex<ChatSession>>>>,
}

impl AppState {
    pub fn new(engine: Engine) -> Self {
        Self { engine, sessions: Mutex::new(HashMap::new()) }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    fn session(&self, id: &str) -> Arc<Mutex<ChatSession>> {
        let mut map = self.sessions.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(id.to_string()).or_insert_with(|| Arc::new(Mutex::new(self.engine.new_session(id)))).clone()
    }

    /// Runs one turn for `session_id`, creating the session on first use.
    pub fn chat(&self, session_id: &str, message: &str) -> improv_core::Result<FinalResponse> {
        let session = self.session(session_id);
        let mut session = session.lock().unwrap_or_else(|e| e.into_inner());
        // Wall-clock time can step backwards; timestamps must not.
        let ts = now_millis().max(session.last_timestamp().unwrap_or(0));
        self.engine.respond(&mut session, message, ts)
    }

    /// Every recorded turn, ordered by session id.
    pub fn transcript(&self) -> Vec<TranscriptLine> {
        let map = self.sessions.lock().unwrap_or_else(|e| e.into_inner());
        let mut ids: Vec<&String> = map.keys().collect();
        ids.sort();
        let mut out = Vec::new();
        for id in ids {
            let session = map[id].lock().unwrap_or_else(|e| e.into_inner());
            out.extend(session.turns().iter().map(|t| TranscriptLine { session_id: id.clone(), turn: t.clone() }));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TranscriptLine {
    pub session_id: String,
    #[serde(flatten)]
    pub turn: Turn,
}

fn now_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

fn bad_request(msg: impl Into<String>) -> Response {
    (StatusCode::BAD_REQUEST, Json(serde_json::json!({ "error": msg.into() }))).into_response()
}

async fn chat(
    State(state): State<Arc<AppState>>,
    Query(params): Query<ChatParams>,
    body: std::result::Result<Json<ChatRequest>, JsonRejection>,
) -> Response {
    let Json(req) = match body {
        Ok(b) => b,
        Err(e) => return bad_request(e.body_text()),
    };
    if req.message.trim().is_empty() {
        return bad_request("message is empty");
    }
    if req.session_id.is_empty() {
        return bad_request("session_id is empty");
    }
    match state.chat(&req.session_id, &req.message) {
        Ok(resp) => Json(ChatReply::new(resp, params.debug())).into_response(),
        Err(e) => bad_request(e.to_string()),
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

pub fn router(state: Arc<AppState>, static_dir: Option<&Path>) -> Router {
    let api = Router::new().route("/api/chat", post(chat)).route("/api/health", get(health)).with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub struct ServeOptions {
    pub bind: String,
    pub static_dir: Option<PathBuf>,
    pub transcript_path: Option<PathBuf>,
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
    log::info!("shutting down");
}

pub async fn serve(engine: Engine, opts: ServeOptions) -> Result<()> {
    let state = Arc::new(AppState::new(engine));
    let app = router(state.clone(), opts.static_dir.as_deref());
    let listener = tokio::net::TcpListener::bind(&opts.bind)
        .await
        .map_err(|e| ImprovError::Usage(format!("cannot bind {}: {e}", opts.bind)))?;
    log::info!("listening on {}", opts.bind);
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown_signal())
        .await
        .map_err(|e| ImprovError::Usage(format!("server error: {e}")))?;
    if let Some(path) = &opts.transcript_path {
        crate::jsonl::write_all(path, &state.transcript())?;
        log::info!("transcript written to {}", path.display());
    }
    Ok(())
}
