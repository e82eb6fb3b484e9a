//! HTTP front end for supervised sessions.
//!
//! | route | |
//! |---|---|
//! | `POST /v1/sessions` | create a session |
//! | `POST /v1/sessions/{id}/messages` | run one user turn |
//! | `GET /v1/sessions/{id}/events` | server-sent events for the session |
//! | `GET /v1/sessions/{id}/transcript` | the persisted transcript |
//! | `GET /healthz` | liveness |
//!
//! Event names are `user_turn`, `candidate_scored`, `feedback_issued` and
//! `agent_turn`, each carrying the JSON form of [`SessionEvent`]. Idle streams get a
//! `heartbeat` event on a fixed interval. A session runs one message at a time; a
//! second message while one is in flight is refused with 409.

use std::collections::HashMap;
use std::convert::Infallible;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parley_core::config::{ConfigError, FieldError};
use parley_core::{
    ChatProvider, FeedbackEvent, GenerationSettings, MetricReport, ObserverConfig, Session, SessionError,
    SessionEvent, DEFAULT_SYSTEM_PROMPT,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use tokio::sync::{broadcast, Mutex};
use tokio_stream::wrappers::BroadcastStream;
use tokio_stream::{Stream, StreamExt};

pub const DEFAULT_HEARTBEAT: Duration = Duration::from_secs(15);
const EVENT_BUFFER: usize = 256;

#[derive(Clone)]
pub struct ServiceConfig {
    /// Base observer config; per-session overrides apply on top.
    pub observer: ObserverConfig,
    pub settings: GenerationSettings,
    /// Transcripts are written to `{data_dir}/{id}.jsonl` when set.
    pub data_dir: Option<PathBuf>,
    pub heartbeat: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            observer: ObserverConfig::default(),
            settings: GenerationSettings::default(),
            data_dir: None,
            heartbeat: DEFAULT_HEARTBEAT,
        }
    }
}

struct Slot {
    session: Mutex<Session>,
    busy: AtomicBool,
    events: broadcast::Sender<SessionEvent>,
}

struct Inner {
    config: ServiceConfig,
    provider: Arc<dyn ChatProvider>,
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(config: ServiceConfig, provider: Arc<dyn ChatProvider>) -> Self {
        Self(Arc::new(Inner {
            config,
            provider,
            sessions: RwLock::new(HashMap::new()),
        }))
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.0
            .sessions
            .read()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}/messages", post(post_message))
        .route("/v1/sessions/{id}/events", get(events))
        .route("/v1/sessions/{id}/transcript", get(transcript))
        .with_state(state)
}

/// Serves `router(state)` on an already bound listener until the future is dropped.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    fields: Vec<FieldError>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                error: error.into(),
                fields: Vec::new(),
            },
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no session {id}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<ConfigError> for ApiError {
    fn from(e: ConfigError) -> Self {
        let mut err = ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string());
        err.body.fields = e.field_errors().to_vec();
        err
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::EmptyMessage => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::Provider(_) => StatusCode::BAD_GATEWAY,
            SessionError::Transcript(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

async fn healthz() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub system_prompt: Option<String>,
    pub config_overrides: Option<Map<String, Value>>,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub seed: u64,
    pub system_prompt: String,
    pub config: ObserverConfig,
}

fn parse_body<T: for<'de> Deserialize<'de> + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("bad request body: {e}")))
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<(StatusCode, Json<SessionCreated>), ApiError> {
    let req: CreateSession = parse_body(&body)?;
    let base = &state.0.config.observer;
    let config = match &req.config_overrides {
        Some(o) => base.with_overrides(o)?,
        None => base.clone(),
    };
    // kept below 2^63 so the seed survives a TOML round trip
    let seed = req.seed.unwrap_or_else(|| rand::random::<u64>() >> 1);
    let prompt = req.system_prompt.unwrap_or_else(|| DEFAULT_SYSTEM_PROMPT.to_string());
    let id = uuid::Uuid::new_v4().to_string();
    let mut builder = Session::builder(config, seed)
        .id(id.clone())
        .system_prompt(prompt.clone())
        .settings(state.0.config.settings.clone());
    if let Some(dir) = &state.0.config.data_dir {
        builder = builder.transcript(dir.join(format!("{id}.jsonl")));
    }
    let session = builder.build()?;
    let config = session.config().clone();
    let (events, _) = broadcast::channel(EVENT_BUFFER);
    state.0.sessions.write().expect("session table poisoned").insert(
        id.clone(),
        Arc::new(Slot {
            session: Mutex::new(session),
            busy: AtomicBool::new(false),
            events,
        }),
    );
    tracing::info!(session = %id, seed, "session created");
    Ok((
        StatusCode::CREATED,
        Json(SessionCreated {
            session_id: id,
            seed,
            system_prompt: prompt,
            config,
        }),
    ))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostMessage {
    pub text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MessageReply {
    pub turn_index: u32,
    pub agent_text: String,
    pub metrics: MetricReport,
    pub regeneration_attempts: u32,
    pub feedback: Option<FeedbackEvent>,
}

struct BusyGuard<'a>(&'a AtomicBool);

impl Drop for BusyGuard<'_> {
    fn drop(&mut self) {
        self.0.store(false, Ordering::Release);
    }
}

async fn post_message(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<MessageReply>, ApiError> {
    let slot = state.slot(&id)?;
    let req: PostMessage = parse_body(&body)?;
    if slot
        .busy
        .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
        .is_err()
    {
        return Err(ApiError::new(StatusCode::CONFLICT, format!("session {id} is busy with another message")));
    }
    let _guard = BusyGuard(&slot.busy);
    let mut session = slot.session.lock().await;
    let events = slot.events.clone();
    let mut emit = move |e: SessionEvent| {
        // no subscribers is fine
        let _ = events.send(e);
    };
    let outcome = session
        .user_turn(&req.text, state.0.provider.as_ref(), &mut emit)
        .await
        .inspect_err(|e| tracing::warn!(session = %id, error = %e, "turn failed"))?;
    let agent = outcome.agent;
    Ok(Json(MessageReply {
        turn_index: agent.turn_index,
        agent_text: agent.text,
        metrics: agent.metrics.expect("agent turns carry metrics"),
        regeneration_attempts: agent.regeneration_attempts,
        feedback: outcome.feedback,
    }))
}

fn to_sse(e: SessionEvent) -> Event {
    Event::default()
        .event(e.name())
        .json_data(&e)
        .expect("session events serialize")
}

async fn events(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let slot = state.slot(&id)?;
    let stream = BroadcastStream::new(slot.events.subscribe()).filter_map(|item| match item {
        Ok(e) => Some(Ok(to_sse(e))),
        Err(tokio_stream::wrappers::errors::BroadcastStreamRecvError::Lagged(n)) => {
            Some(Ok(Event::default().event("lagged").data(json!({ "missed": n }).to_string())))
        }
    });
    let keep_alive = KeepAlive::new()
        .interval(state.0.config.heartbeat)
        .event(Event::default().event("heartbeat").data("{}"));
    Ok(Sse::new(stream).keep_alive(keep_alive))
}

async fn transcript(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let slot = state.slot(&id)?;
    let session = slot.session.lock().await;
    let bytes = match session.transcript_path() {
        Some(path) => std::fs::read(path).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("cannot read transcript: {e}")))?,
        None => session.transcript_bytes(),
    };
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], bytes).into_response())
}
