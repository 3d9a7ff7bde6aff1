//! HTTP API over sessions, with generation progress pushed as server-sent events.

mod error;

use std::collections::HashMap;
use std::convert::Infallible;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::mpsc;
use tokio_stream::wrappers::UnboundedReceiverStream;
use uuid::Uuid;

use crate::css::{parse_css, parse_value, TypedValue};
use crate::prompting::{CompletionProvider, ProviderErrorKind, TemplateVariant};
use crate::property_sheet::{derive_sheet, EntrySource};
use crate::session::{
    create_session, Design, IterationObserver, IterationRequest, PendingIteration, Session, SessionError,
};

pub use error::ApiError;

pub const API_SCHEMA: &str = include_str!("../../schema/api.schema.json");
pub const SESSION_LOG_SCHEMA: &str = include_str!("../../schema/session-log.schema.json");

const PLACEHOLDER_PAGE: &str = "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>Keyframer</title></head>\n<body><h1>Keyframer</h1><p>The API is running under <code>/api</code>. Start the server with <code>--ui-dir</code> to serve the web interface here.</p></body></html>\n";

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Sessions are written here after every change and loaded at startup.
    pub data_dir: Option<PathBuf>,
    pub ui_dir: Option<PathBuf>,
    pub template: TemplateVariant,
}

struct Slot {
    session: Mutex<Session>,
    streaming: AtomicBool,
}

pub struct AppState {
    sessions: RwLock<HashMap<Uuid, Arc<Slot>>>,
    provider: Arc<dyn CompletionProvider>,
    config: ServiceConfig,
}

/// Clears the streaming flag when generation ends, however it ends.
struct StreamGuard(Arc<Slot>);

impl Drop for StreamGuard {
    fn drop(&mut self) {
        self.0.streaming.store(false, Ordering::SeqCst);
    }
}

impl AppState {
    pub fn new(provider: Arc<dyn CompletionProvider>, config: ServiceConfig) -> std::io::Result<Arc<AppState>> {
        let state = AppState {
            sessions: RwLock::new(HashMap::new()),
            provider,
            config,
        };
        if let Some(dir) = &state.config.data_dir {
            std::fs::create_dir_all(dir)?;
            for entry in std::fs::read_dir(dir)? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "json") {
                    match std::fs::read(&path).map_err(|e| e.to_string()).and_then(|b| {
                        Session::import_log(&b).map_err(|e| e.to_string())
                    }) {
                        Ok(s) => state.insert(s),
                        Err(e) => tracing::warn!(path = %path.display(), "skipping session file: {e}"),
                    }
                }
            }
        }
        Ok(Arc::new(state))
    }

    fn insert(&self, session: Session) {
        let id = session.id;
        let slot = Arc::new(Slot {
            session: Mutex::new(session),
            streaming: AtomicBool::new(false),
        });
        self.sessions.write().unwrap().insert(id, slot);
    }

    fn slot(&self, id: &str) -> Result<(Uuid, Arc<Slot>), ApiError> {
        let uuid = Uuid::parse_str(id).map_err(|_| ApiError::not_found("session", id))?;
        let slot = self.sessions.read().unwrap().get(&uuid).cloned();
        slot.map(|s| (uuid, s)).ok_or_else(|| ApiError::not_found("session", id))
    }

    fn slot_for_design(&self, id: &str) -> Result<(Uuid, Arc<Slot>), ApiError> {
        let uuid = Uuid::parse_str(id).map_err(|_| ApiError::not_found("design", id))?;
        let sessions = self.sessions.read().unwrap();
        sessions
            .values()
            .find(|slot| slot.session.lock().unwrap().design(uuid).is_some())
            .cloned()
            .map(|s| (uuid, s))
            .ok_or_else(|| ApiError::not_found("design", id))
    }

    fn persist(&self, session: &Session) {
        let Some(dir) = &self.config.data_dir else { return };
        let path = dir.join(format!("{}.json", session.id));
        let tmp = path.with_extension("json.tmp");
        let result = std::fs::write(&tmp, session.to_document()).and_then(|_| std::fs::rename(&tmp, &path));
        if let Err(e) = result {
            tracing::error!(path = %path.display(), "could not save session: {e}");
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/api/schema", get(|| async { ([(header::CONTENT_TYPE, "application/schema+json")], API_SCHEMA) }))
        .route("/api/sessions", post(create))
        .route("/api/sessions/import", post(import))
        .route("/api/sessions/{id}", get(snapshot))
        .route("/api/sessions/{id}/summary", get(summary))
        .route("/api/sessions/{id}/export", get(export))
        .route("/api/sessions/{id}/iterations", post(iterate))
        .route("/api/sessions/{id}/iterations/{n}/regenerate", post(regenerate))
        .route("/api/designs/{id}", get(design))
        .route("/api/designs/{id}/css", patch(edit_css))
        .route("/api/designs/{id}/property", patch(edit_property))
        .route("/api/designs/{id}/property-sheet", get(property_sheet))
        .route("/api/designs/{id}/favorite", post(favorite))
        .fallback_service(get(not_found_api));
    let app = match &state.config.ui_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER_PAGE) })),
    };
    app.with_state(state)
}

pub async fn serve(addr: std::net::SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

async fn not_found_api() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::invalid(e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    svg: String,
}

fn created(session: &Session) -> Response {
    let body = json!({
        "session_id": session.id,
        "element_index": session.svg.index,
        "preprocessed_svg": session.svg.svg,
        "stats": session.svg.stats,
        "warnings": session.svg.warnings,
    });
    (StatusCode::CREATED, Json(body)).into_response()
}

async fn create(State(state): State<Arc<AppState>>, bytes: Bytes) -> Result<Response, ApiError> {
    let CreateBody { svg } = body(&bytes)?;
    let session = create_session(&svg).map_err(ApiError::from)?;
    state.persist(&session);
    let response = created(&session);
    state.insert(session);
    Ok(response)
}

async fn import(State(state): State<Arc<AppState>>, bytes: Bytes) -> Result<Response, ApiError> {
    let session = Session::import_log(&bytes).map_err(ApiError::from)?;
    {
        let sessions = state.sessions.read().unwrap();
        let clash = sessions.contains_key(&session.id)
            || session.designs().any(|d| {
                sessions.values().any(|slot| slot.session.lock().unwrap().design(d.id).is_some())
            });
        if clash {
            return Err(ApiError::new(StatusCode::CONFLICT, "conflict", "a session with these ids is already loaded"));
        }
    }
    state.persist(&session);
    let response = created(&session);
    state.insert(session);
    Ok(response)
}

async fn snapshot(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Session>, ApiError> {
    let (_, slot) = state.slot(&id)?;
    let session = slot.session.lock().unwrap().clone();
    Ok(Json(session))
}

async fn summary(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let (_, slot) = state.slot(&id)?;
    let s = slot.session.lock().unwrap();
    let iterations: Vec<Value> = s
        .iterations
        .iter()
        .map(|it| {
            json!({
                "index": it.index,
                "kind": it.kind,
                "prompt_text": it.prompt_text,
                "base_design": it.base_design,
                "failed": it.failed(),
                "designs": it.designs.iter().map(|d| json!({
                    "id": d.id,
                    "scope_index": d.scope_index,
                    "explanation": d.explanation,
                    "favorite": s.favorites.contains(&d.id),
                    "edited": !d.edits.is_empty(),
                    "error_count": d.lint.error_count,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(Json(json!({"session_id": s.id, "favorites": s.favorites, "iterations": iterations})))
}

async fn export(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let (_, slot) = state.slot(&id)?;
    let bytes = {
        let mut s = slot.session.lock().unwrap();
        let bytes = s.export_log();
        state.persist(&s);
        bytes
    };
    Ok(([(header::CONTENT_TYPE, "application/json")], bytes).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IterateBody {
    prompt: String,
    #[serde(default)]
    base_design_id: Option<Uuid>,
    #[serde(default)]
    template: Option<TemplateVariant>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RegenerateBody {
    #[serde(default)]
    prompt: Option<String>,
}

fn begin_streaming(slot: &Arc<Slot>) -> Result<StreamGuard, ApiError> {
    if slot.streaming.swap(true, Ordering::SeqCst) {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "conflict",
            "a generation is already running for this session",
        ));
    }
    Ok(StreamGuard(slot.clone()))
}

async fn iterate(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Response, ApiError> {
    let (_, slot) = state.slot(&id)?;
    let b: IterateBody = body(&bytes)?;
    let guard = begin_streaming(&slot)?;
    let pending = {
        let mut s = slot.session.lock().unwrap();
        let request = IterationRequest {
            prompt_text: b.prompt,
            base_design: b.base_design_id,
            template: b.template.unwrap_or(state.config.template),
        };
        s.prepare_iteration(request).map_err(ApiError::from)?
    };
    Ok(stream_iteration(state, slot, pending, guard).await)
}

async fn regenerate(
    State(state): State<Arc<AppState>>,
    Path((id, n)): Path<(String, String)>,
    bytes: Bytes,
) -> Result<Response, ApiError> {
    let (_, slot) = state.slot(&id)?;
    let n: usize = n.parse().map_err(|_| ApiError::not_found("iteration", &n))?;
    let b: RegenerateBody = if bytes.iter().all(u8::is_ascii_whitespace) {
        RegenerateBody::default()
    } else {
        body(&bytes)?
    };
    let guard = begin_streaming(&slot)?;
    let pending = {
        let mut s = slot.session.lock().unwrap();
        s.prepare_regenerate(n, b.prompt.as_deref()).map_err(ApiError::from)?
    };
    Ok(stream_iteration(state, slot, pending, guard).await)
}

enum Push {
    Chunk(String),
    Design(Value),
    Done(Value),
    Error(ApiError),
}

impl Push {
    fn event(&self) -> Event {
        let (name, data) = match self {
            Push::Chunk(text) => ("chunk", json!({ "text": text })),
            Push::Design(v) => ("design", v.clone()),
            Push::Done(v) => ("done", v.clone()),
            Push::Error(e) => ("error", json!({"code": e.code, "message": e.message})),
        };
        Event::default().event(name).data(data.to_string())
    }
}

struct ChannelObserver(mpsc::UnboundedSender<Push>);

pub(crate) fn design_event(d: &Design) -> Value {
    json!({
        "ordinal": d.ordinal,
        "design_id": d.id,
        "scope_index": d.scope_index,
        "css": d.css_original,
        "explanation": d.explanation,
        "lint": d.lint,
    })
}

impl IterationObserver for ChannelObserver {
    fn chunk(&mut self, text: &str) {
        let _ = self.0.send(Push::Chunk(text.to_string()));
    }

    fn design(&mut self, design: &Design) {
        let _ = self.0.send(Push::Design(design_event(design)));
    }
}

fn provider_error(kind: ProviderErrorKind, message: &str) -> ApiError {
    let code = match kind {
        ProviderErrorKind::Network => "provider_network",
        ProviderErrorKind::Auth => "provider_auth",
        ProviderErrorKind::Timeout => "provider_timeout",
        ProviderErrorKind::Provider => "provider_error",
    };
    ApiError::new(StatusCode::BAD_GATEWAY, code, message)
}

/// Runs generation in a background task. If it fails before producing any
/// output the caller gets a plain 502; otherwise the response is an event
/// stream that ends with `done` or `error`.
async fn stream_iteration(
    state: Arc<AppState>,
    slot: Arc<Slot>,
    pending: PendingIteration,
    guard: StreamGuard,
) -> Response {
    let (tx, mut rx) = mpsc::unbounded_channel();
    let provider = state.provider.clone();
    tokio::spawn(async move {
        let _guard = guard;
        let mut observer = ChannelObserver(tx.clone());
        let executed = pending.execute(provider.as_ref(), &mut observer).await;
        let elapsed = executed.record().elapsed_seconds;
        let outcome = {
            let mut s = slot.session.lock().unwrap();
            let outcome = s.commit(executed);
            state.persist(&s);
            outcome
        };
        let last = match outcome {
            Ok(it) => Push::Done(json!({
                "iteration": it.index,
                "elapsed_seconds": elapsed,
                "design_count": it.designs.len(),
            })),
            Err(SessionError::Provider { error, .. }) => Push::Error(provider_error(error.kind, &error.message)),
            Err(e) => Push::Error(ApiError::from(e)),
        };
        let _ = tx.send(last);
    });

    let first = rx.recv().await;
    if let Some(Push::Error(e)) = first {
        return e.into_response();
    }
    let head = stream::iter(first.map(|p| Ok::<_, Infallible>(p.event())));
    let rest = UnboundedReceiverStream::new(rx).map(|p| Ok(p.event()));
    let events: std::pin::Pin<Box<dyn Stream<Item = Result<Event, Infallible>> + Send>> = Box::pin(head.chain(rest));
    Sse::new(events).keep_alive(KeepAlive::default()).into_response()
}

async fn design(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Design>, ApiError> {
    let (uuid, slot) = state.slot_for_design(&id)?;
    let d = slot.session.lock().unwrap().design(uuid).cloned();
    d.map(Json).ok_or_else(|| ApiError::not_found("design", &id))
}

fn design_with_sheet(session: &Session, id: Uuid) -> Value {
    let d = session.design(id).expect("design exists");
    let sheet = derive_sheet(&parse_css(&d.css_current).sheet, session.index());
    json!({"design": d, "property_sheet": sheet})
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CssBody {
    css: String,
}

async fn edit_css(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<Value>, ApiError> {
    let CssBody { css } = body(&bytes)?;
    let (uuid, slot) = state.slot_for_design(&id)?;
    let mut s = slot.session.lock().unwrap();
    let d = s.apply_code_edit(uuid, &css).map_err(ApiError::from)?;
    state.persist(&s);
    Ok(Json(json!({"design": d, "lint": d.lint})))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PropertyBody {
    source: EntrySource,
    /// Raw CSS text, or a typed value as found in the property sheet.
    value: Value,
}

async fn edit_property(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<Value>, ApiError> {
    let PropertyBody { source, value } = body(&bytes)?;
    let value: TypedValue = match value {
        Value::String(raw) => parse_value(&source.property, &raw),
        other => serde_json::from_value(other).map_err(|e| ApiError::invalid(format!("value: {e}")))?,
    };
    let (uuid, slot) = state.slot_for_design(&id)?;
    let mut s = slot.session.lock().unwrap();
    s.apply_property_edit(uuid, &source, &value).map_err(ApiError::from)?;
    state.persist(&s);
    Ok(Json(design_with_sheet(&s, uuid)))
}

async fn property_sheet(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let (uuid, slot) = state.slot_for_design(&id)?;
    let s = slot.session.lock().unwrap();
    Ok(Json(design_with_sheet(&s, uuid)))
}

async fn favorite(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let (uuid, slot) = state.slot_for_design(&id)?;
    let mut s = slot.session.lock().unwrap();
    let now = s.toggle_favorite(uuid).map_err(ApiError::from)?;
    state.persist(&s);
    Ok(Json(json!({"design_id": uuid, "favorite": now})))
}
