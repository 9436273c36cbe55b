//! HTTP routes.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use curation_core::analytics::{
    read_groups, read_sus_responses, sus_summary, AnalyticsError, ExactMode, MwuOptions,
    SusResponse,
};
use curation_core::game::{GameError, GameRules};
use curation_core::scene::{to_json, validate_scene, MuseumScene, ValidationReport};
use curation_core::sessionlog::{EventKind, EventOutcome};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::report::{compare, Group};
use crate::store::{ActionError, ApiSession, RestoreReport, SessionStore, StoredReply};

pub const VERSION_HEADER: &str = "x-scene-version";
pub const IDEMPOTENCY_HEADER: &str = "idempotency-key";

#[derive(Clone)]
pub struct AppState {
    pub rules: Arc<GameRules>,
    scene_json: Arc<str>,
    assets: Option<PathBuf>,
    pub store: Arc<SessionStore>,
}

#[derive(Debug)]
pub enum StartError {
    InvalidScene(ValidationReport),
    Rules(GameError),
    Io(std::io::Error),
}

impl std::fmt::Display for StartError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StartError::InvalidScene(r) => {
                writeln!(f, "scene has {} validation findings:", r.findings.len())?;
                for finding in &r.findings {
                    writeln!(f, "  {finding}")?;
                }
                Ok(())
            }
            StartError::Rules(e) => write!(f, "{e}"),
            StartError::Io(e) => write!(f, "session log directory: {e}"),
        }
    }
}

impl std::error::Error for StartError {}

impl AppState {
    /// Validates the scene, then restores sessions from `log_dir`.
    pub fn new(
        scene: MuseumScene,
        assets: Option<PathBuf>,
        log_dir: impl Into<PathBuf>,
    ) -> Result<(Self, RestoreReport), StartError> {
        let report = validate_scene(&scene);
        if !report.is_clean() {
            return Err(StartError::InvalidScene(report));
        }
        let scene_json: Arc<str> = to_json(&scene).into();
        let rules = Arc::new(GameRules::from_scene(Arc::new(scene)).map_err(StartError::Rules)?);
        let (store, restored) = SessionStore::open(rules.clone(), log_dir).map_err(StartError::Io)?;
        let state = Self {
            rules,
            scene_json,
            assets,
            store: Arc::new(store),
        };
        Ok((state, restored))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/scene", get(get_scene))
        .route("/api/assets/{file}", get(get_asset))
        .route("/api/exhibits/{id}/knowledge", get(get_knowledge))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/actions", post(post_action))
        .route("/api/sessions/{id}/submit", post(post_submit))
        .route("/api/analytics/sus", post(analytics_sus))
        .route("/api/analytics/compare", post(analytics_compare))
        .with_state(state)
}

/// Error body: `{"error": code, "message": ...}` plus an optional finding.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
    finding: Option<Value>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            code: code.into(),
            message: message.into(),
            finding: None,
        }
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not-found", format!("unknown {what} {id}"))
    }

    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }

    fn body(&self) -> Value {
        let mut b = json!({ "error": self.code, "message": self.message });
        if let Some(f) = &self.finding {
            b["finding"] = f.clone();
        }
        b
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

impl From<AnalyticsError> for ApiError {
    fn from(e: AnalyticsError) -> Self {
        ApiError::bad_request("invalid-input", e.to_string())
    }
}

fn rule_violation(e: GameError, event: &EventKind) -> ApiError {
    ApiError {
        status: StatusCode::CONFLICT,
        code: e.code().into(),
        message: e.to_string(),
        finding: Some(json!({ "event": event.name(), "code": e.code(), "message": e.to_string() })),
    }
}

async fn get_scene(State(app): State<AppState>) -> Response {
    let version = HeaderValue::from_str(&app.rules.scene().version).expect("printable version");
    (
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("application/json")),
            (header::HeaderName::from_static(VERSION_HEADER), version),
        ],
        app.scene_json.to_string(),
    )
        .into_response()
}

async fn get_asset(State(app): State<AppState>, Path(file): Path<String>) -> Result<Response, ApiError> {
    let id = file
        .strip_suffix(".glb")
        .ok_or_else(|| ApiError::not_found("asset", &file))?;
    let exhibit = app
        .rules
        .scene()
        .exhibit(id)
        .ok_or_else(|| ApiError::not_found("exhibit", id))?;
    let dir = app
        .assets
        .as_ref()
        .ok_or_else(|| ApiError::not_found("asset", &file))?;
    let bytes = tokio::fs::read(dir.join(&exhibit.mesh_asset))
        .await
        .map_err(|_| ApiError::not_found("asset", &file))?;
    Ok(([(header::CONTENT_TYPE, "model/gltf-binary")], bytes).into_response())
}

async fn get_knowledge(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let e = app
        .rules
        .scene()
        .exhibit(&id)
        .ok_or_else(|| ApiError::not_found("exhibit", &id))?;
    Ok(Json(json!({
        "exhibit_id": e.id,
        "display_name": e.display_name,
        "knowledge_text": e.knowledge_text,
        "category": e.category,
        "purpose": e.purpose,
        "dynasty": e.dynasty,
        "level": e.level,
    })))
}

fn idempotency_key(headers: &HeaderMap) -> Result<Option<String>, ApiError> {
    match headers.get(IDEMPOTENCY_HEADER) {
        None => Ok(None),
        Some(v) => v
            .to_str()
            .ok()
            .filter(|s| !s.is_empty() && s.len() <= 256)
            .map(|s| Some(s.to_string()))
            .ok_or_else(|| ApiError::bad_request("bad-idempotency-key", "idempotency key must be 1..256 visible characters")),
    }
}

async fn create_session(State(app): State<AppState>, headers: HeaderMap) -> Result<Response, ApiError> {
    let key = idempotency_key(&headers)?;
    let (id, fresh) = app.store.create(key.as_deref()).await.map_err(ApiError::internal)?;
    let session = app.store.get(&id).expect("just created");
    let s = session.lock().await;
    let status = if fresh { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(s.view())).into_response())
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = app.store.get(&id).ok_or_else(|| ApiError::not_found("session", &id))?;
    let s = session.lock().await;
    Ok(Json(s.view()).into_response())
}

fn action_body(s: &ApiSession, t: u64, event: &EventKind, outcome: &EventOutcome) -> Value {
    json!({
        "t": t,
        "event": event,
        "outcome": outcome,
        "phase": s.state.phase,
        "level": s.state.current_level,
        "gates_open": s.state.gates_open,
        "state": s.state,
    })
}

fn submit_body(s: &ApiSession, t: u64, outcome: &EventOutcome) -> Value {
    let EventOutcome::Submitted(out) = outcome else {
        unreachable!("submit yields a submission outcome")
    };
    json!({
        "t": t,
        "level": out.result.level,
        "accuracy": out.result.accuracy,
        "correct_count": out.result.correct_count,
        "required_placements": out.result.required_placements,
        "passed": out.result.passed,
        "verdict": if out.result.passed { "Pass" } else { "Not pass" },
        "gate_opened": out.gate_opened,
        "finished": out.finished,
        "result": out.result,
        "phase": s.state.phase,
        "gates_open": s.state.gates_open,
        "state": s.state,
    })
}

/// Runs one event under the session lock, honoring the idempotency key.
async fn run_event(
    app: &AppState,
    id: &str,
    headers: &HeaderMap,
    event: EventKind,
    fingerprint: String,
    shape: fn(&ApiSession, u64, &EventKind, &EventOutcome) -> Value,
) -> Result<Response, ApiError> {
    let key = idempotency_key(headers)?;
    let session = app.store.get(id).ok_or_else(|| ApiError::not_found("session", id))?;
    let mut s = session.lock().await;
    if let Some(k) = &key {
        if let Some(r) = s.reply(k) {
            if r.fingerprint != fingerprint {
                return Err(ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "idempotency-key-reused",
                    format!("key {k} was already used for a different request"),
                ));
            }
            let status = StatusCode::from_u16(r.status).expect("stored status");
            return Ok((status, Json(r.body.clone())).into_response());
        }
    }
    let (status, body) = match s.apply(&app.rules, event.clone()) {
        Ok(done) => (StatusCode::OK, shape(&s, done.t, &event, &done.outcome)),
        Err(ActionError::Rule(e)) => {
            let err = rule_violation(e, &event);
            (err.status, err.body())
        }
        // nothing was committed, so the client may retry with the same key
        Err(ActionError::Io(e)) => return Err(ApiError::internal(e)),
    };
    if let Some(k) = key {
        s.remember(
            k,
            StoredReply {
                fingerprint,
                status: status.as_u16(),
                body: body.clone(),
            },
        );
    }
    Ok((status, Json(body)).into_response())
}

async fn post_action(
    State(app): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let event: EventKind = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request("malformed-action", e.to_string()))?;
    let fingerprint = serde_json::to_string(&event).expect("event serializes");
    run_event(&app, &id, &headers, event, fingerprint, action_body).await
}

async fn post_submit(State(app): State<AppState>, Path(id): Path<String>, headers: HeaderMap) -> Result<Response, ApiError> {
    run_event(&app, &id, &headers, EventKind::SubmitClick, "submit".into(), |s, t, _, o| {
        submit_body(s, t, o)
    })
    .await
}

fn is_csv(headers: &HeaderMap) -> bool {
    headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("text/csv"))
}

#[derive(Deserialize)]
struct SusRequest {
    responses: Vec<SusResponse>,
}

async fn analytics_sus(headers: HeaderMap, body: Bytes) -> Result<Response, ApiError> {
    let responses = if is_csv(&headers) {
        read_sus_responses(&body[..])?
    } else {
        let req: SusRequest = serde_json::from_slice(&body)
            .map_err(|e| ApiError::bad_request("invalid-input", e.to_string()))?;
        for r in &req.responses {
            r.validate()?;
        }
        req.responses
    };
    Ok(Json(sus_summary(&responses)?).into_response())
}

#[derive(Deserialize, Default)]
struct CompareParams {
    exact: Option<String>,
    seed: Option<u64>,
    draws: Option<usize>,
}

#[derive(Deserialize)]
struct CompareRequest {
    groups: Vec<Group>,
    #[serde(flatten)]
    params: CompareParams,
}

async fn analytics_compare(
    Query(query): Query<CompareParams>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let (groups, params) = if is_csv(&headers) {
        let [(l1, v1), (l2, v2)] = read_groups(&body[..])?;
        (vec![Group { label: l1, values: v1 }, Group { label: l2, values: v2 }], query)
    } else {
        let req: CompareRequest = serde_json::from_slice(&body)
            .map_err(|e| ApiError::bad_request("invalid-input", e.to_string()))?;
        (req.groups, req.params)
    };
    let [g1, g2]: [Group; 2] = groups
        .try_into()
        .map_err(|g: Vec<Group>| ApiError::from(AnalyticsError::GroupCount(g.len())))?;
    let mut opts = MwuOptions::default();
    if let Some(e) = params.exact {
        opts.exact = e
            .parse::<ExactMode>()
            .map_err(|m| ApiError::bad_request("invalid-input", m))?;
    }
    opts.seed = params.seed.unwrap_or(opts.seed);
    opts.draws = params.draws.unwrap_or(opts.draws).clamp(1, 10_000_000);
    let report = tokio::task::spawn_blocking(move || compare(&g1, &g2, &opts))
        .await
        .map_err(ApiError::internal)??;
    Ok(Json(report).into_response())
}
