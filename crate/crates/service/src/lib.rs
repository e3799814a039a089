//! HTTP/JSON API for interactive simulation sessions and one-shot
//! verification.
//!
//! Sessions live in memory only and are lost on restart. Requests to one
//! session are serialized by a per-session lock; distinct sessions proceed
//! in parallel.

mod json;

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};

use statepat::engine::{EngineError, Executable, Session};
use statepat::patterns::Pattern;
use statepat::text::{parse_model, parse_query};
use statepat::verifier::{check_on, explore, replay, EnvPolicy, VerifyError};
use statepat::{validate_model, Model};

pub use json::{snapshot, step_json};

/// Steps kept per session for `GET /sessions/{id}`.
pub const HISTORY_BOUND: usize = 500;
/// Largest `count` accepted by one step request.
pub const MAX_STEPS_PER_REQUEST: usize = 100_000;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Model used by `POST /sessions` and `POST /verify` when the request
    /// carries no `model_text`.
    pub preload: Option<String>,
    pub state_limit: usize,
    /// Allowed CORS origin; `None` allows any.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            preload: None,
            state_limit: statepat::verifier::default_state_limit(),
            cors_origin: None,
        }
    }
}

struct SessionRecord {
    session: Session,
    history: VecDeque<Value>,
}

struct AppState {
    config: ServiceConfig,
    sessions: Mutex<HashMap<String, Arc<Mutex<SessionRecord>>>>,
    next_id: AtomicU64,
}

type Shared = Arc<AppState>;

/// An error response: status plus `{"error": ..., ...}` body.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": message.into() }) }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.body[key] = value;
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<VerifyError> for ApiError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::StateLimit { limit } => ApiError::new(StatusCode::REQUEST_TIMEOUT, e.to_string())
                .with("states_explored", json!(limit)),
            VerifyError::Query(_) => ApiError::bad_request(e.to_string()),
            VerifyError::Engine(e) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Err(ApiError::bad_request("request body is empty"));
    }
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

/// An order entry: chart name or priority ID.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OrderItem {
    Id(u32),
    Name(String),
}

#[derive(Debug, Deserialize)]
struct ModelSpec {
    model_text: Option<String>,
    pattern: Option<String>,
    order: Option<Vec<OrderItem>>,
}

impl ModelSpec {
    fn build(&self, config: &ServiceConfig) -> ApiResult<Model> {
        let text = self
            .model_text
            .as_deref()
            .or(config.preload.as_deref())
            .ok_or_else(|| ApiError::bad_request("missing `model_text`"))?;
        let m = parse_model(text).map_err(|e| {
            ApiError::bad_request(format!("parse error: {e}")).with(
                "diagnostics",
                json!([{ "line": e.span.line, "column": e.span.column, "message": e.message }]),
            )
        })?;
        let diags = validate_model(&m);
        if !diags.is_empty() {
            return Err(invalid(diags.iter().map(|d| d.to_string()).collect()));
        }
        let order: Option<Vec<String>> = self.order.as_ref().map(|o| {
            o.iter()
                .map(|i| match i {
                    OrderItem::Id(id) => id.to_string(),
                    OrderItem::Name(n) => n.clone(),
                })
                .collect()
        });
        match &self.pattern {
            None if order.is_some() => Err(ApiError::bad_request("`order` needs pattern ceo or both")),
            None => Ok(m),
            Some(p) => {
                let p: Pattern = p.parse().map_err(ApiError::bad_request)?;
                p.apply(&m, order.as_deref())
                    .map_err(|e| ApiError::bad_request(format!("pattern error: {e}")))
            }
        }
    }
}

fn invalid(diagnostics: Vec<String>) -> ApiError {
    ApiError::bad_request("model is invalid").with("diagnostics", json!(diagnostics))
}

fn executable(m: Model) -> ApiResult<Executable> {
    Executable::new(m).map_err(|e| match e {
        EngineError::InvalidModel(d) => invalid(d.iter().map(|d| d.to_string()).collect()),
        other => ApiError::bad_request(other.to_string()),
    })
}

async fn create_session(State(app): State<Shared>, body: Bytes) -> ApiResult<Response> {
    let spec: ModelSpec = parse_body(&body)?;
    let exec = Arc::new(executable(spec.build(&app.config)?)?);
    let session = Session::new(exec);
    let id = format!("s{:x}", app.next_id.fetch_add(1, Ordering::Relaxed) + 1);
    let snap = snapshot(&session);
    let record = SessionRecord { session, history: VecDeque::new() };
    app.sessions.lock().unwrap().insert(id.clone(), Arc::new(Mutex::new(record)));
    Ok((StatusCode::CREATED, Json(json!({ "v": 1, "session_id": id, "initial_snapshot": snap }))).into_response())
}

fn find(app: &AppState, id: &str) -> ApiResult<Arc<Mutex<SessionRecord>>> {
    app.sessions
        .lock()
        .unwrap()
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session `{id}`")))
}

#[derive(Debug, Deserialize)]
struct EventRequest {
    event: String,
}

async fn inject(State(app): State<Shared>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let record = find(&app, &id)?;
    let req: EventRequest = parse_body(&body)?;
    let mut rec = record.lock().unwrap();
    rec.session.inject_event(&req.event).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let pending: Vec<&str> = rec.session.pending().collect();
    Ok((StatusCode::ACCEPTED, Json(json!({ "v": 1, "pending": pending }))).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct StepRequest {
    count: Option<usize>,
}

async fn step(State(app): State<Shared>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let record = find(&app, &id)?;
    let req: StepRequest = if body.iter().all(u8::is_ascii_whitespace) {
        StepRequest::default()
    } else {
        parse_body(&body)?
    };
    let count = req.count.unwrap_or(1);
    if count > MAX_STEPS_PER_REQUEST {
        return Err(ApiError::bad_request(format!("count must be at most {MAX_STEPS_PER_REQUEST}")));
    }
    let mut rec = record.lock().unwrap();
    let mut snapshots = Vec::with_capacity(count);
    let mut traces = Vec::with_capacity(count);
    for _ in 0..count {
        let t = rec
            .session
            .step()
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
        let trace = step_json(rec.session.executable(), &t);
        let snap = snapshot(&rec.session);
        if rec.history.len() == HISTORY_BOUND {
            rec.history.pop_front();
        }
        rec.history.push_back(json!({ "trace": trace, "snapshot": snap }));
        snapshots.push(snap);
        traces.push(trace);
    }
    Ok(Json(json!({ "v": 1, "snapshots": snapshots, "cycle_traces": traces })))
}

async fn get_session(State(app): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let record = find(&app, &id)?;
    let rec = record.lock().unwrap();
    Ok(Json(json!({
        "v": 1,
        "session_id": id,
        "snapshot": snapshot(&rec.session),
        "history": rec.history,
    })))
}

async fn delete_session(State(app): State<Shared>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    match app.sessions.lock().unwrap().remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::new(StatusCode::NOT_FOUND, format!("no session `{id}`"))),
    }
}

#[derive(Debug, Deserialize)]
struct VerifyRequest {
    #[serde(flatten)]
    model: ModelSpec,
    queries: Vec<String>,
    env: Option<String>,
}

async fn verify(State(app): State<Shared>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: VerifyRequest = parse_body(&body)?;
    let exec = executable(req.model.build(&app.config)?)?;
    let policy: EnvPolicy = match &req.env {
        Some(p) => p.parse().map_err(ApiError::bad_request)?,
        None => EnvPolicy::default(),
    };
    let queries = req
        .queries
        .iter()
        .map(|q| parse_query(q).map_err(|e| ApiError::bad_request(format!("query `{q}`: {e}"))))
        .collect::<ApiResult<Vec<_>>>()?;
    let limit = app.config.state_limit;
    let results = tokio::task::spawn_blocking(move || -> ApiResult<Vec<Value>> {
        let g = explore(&exec, policy, limit)?;
        let mut out = Vec::new();
        for q in &queries {
            let r = check_on(&exec, &g, q)?;
            let trace = match &r.trace {
                Some(t) => {
                    let (steps, _) =
                        replay(&exec, t).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
                    Some(json::replay_json(&exec, &steps)?)
                }
                None => None,
            };
            out.push(json!({
                "query": r.query,
                "verdict": if r.holds { "holds" } else { "fails" },
                "states": r.stats.states,
                "trace_len": r.trace.as_ref().map_or(0, |t| t.len()),
                "trace": trace,
            }));
        }
        Ok(out)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(json!({ "v": 1, "results": results })))
}

async fn healthz() -> &'static str {
    "ok"
}

/// Builds the application router.
pub fn router(config: ServiceConfig) -> Router {
    let cors = match &config.cors_origin {
        Some(o) => match HeaderValue::from_str(o) {
            Ok(v) => CorsLayer::new().allow_origin(AllowOrigin::exact(v)),
            Err(_) => CorsLayer::new(),
        },
        None => CorsLayer::new().allow_origin(AllowOrigin::any()),
    }
    .allow_methods(tower_http::cors::Any)
    .allow_headers(tower_http::cors::Any);
    let state = Arc::new(AppState { config, sessions: Mutex::default(), next_id: AtomicU64::new(0) });
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/events", post(inject))
        .route("/sessions/{id}/step", post(step))
        .route("/verify", post(verify))
        .layer(cors)
        .with_state(state)
}

/// Serves the API on an already bound listener until the future is dropped
/// or the process receives Ctrl-C.
pub async fn serve(listener: tokio::net::TcpListener, config: ServiceConfig) -> std::io::Result<()> {
    axum::serve(listener, router(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
