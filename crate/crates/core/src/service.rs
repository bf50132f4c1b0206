//! HTTP front end for the session store.
//!
//! | method | path | body / query | reply |
//! |---|---|---|---|
//! | POST | `/sessions` | | `{session_id}` |
//! | GET | `/sessions/{id}` | | session file |
//! | POST | `/sessions/{id}/ops` | `{expected_revision, op}` | `{revision, prompt?}` |
//! | POST | `/sessions/{id}/prompts` | `{prompt_text, context_text?, expected_revision?}` | prompt record |
//! | POST | `/sessions/{id}/prompts/{pid}/regenerate` | `{expected_revision?}` | prompt record |
//! | POST | `/sessions/{id}/prompts/{pid}/redact` | `{acknowledgment?, expected_revision?}` | `{revision}` |
//! | GET | `/sessions/{id}/prompts/{pid}/ranges` | | linked ranges |
//! | GET | `/sessions/{id}/stats` | | summary statistics |
//! | GET | `/sessions/{id}/timeline` | | timeline glyphs |
//! | GET | `/sessions/{id}/report` | `format=markdown\|html\|structured`, `policy=` | report |
//! | GET | `/sessions/{id}/check` | `policy=` | conformance report |
//! | GET | `/sessions/{id}/export` | | session file |
//! | POST | `/sessions/import` | session file | `{session_id}` |
//! | GET | `/suggestions` | | prompt wizard suggestions |
//!
//! Errors are `{"error": code, "message": text}`.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use crate::analytics::SummaryStats;
use crate::attribution::AttributionLabel;
use crate::conformance::{
    self, DisclosureReport, LinkedRange, PolicyError, ReportFormat, UnsupportedFormat,
};
use crate::format::{export_session, import_session, ImportError};
use crate::gateway::{self, Gateway, GatewayError, ScriptedTransport, SyntheticTransport};
use crate::log::TimelineGlyph;
use crate::prompt::{PromptId, PromptRecord};
use crate::session::{Op, SessionError};
use crate::store::{SessionStore, StoreError};

/// Which language-model transport the service uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportChoice {
    Live,
    /// Scripted replies from a fixture file.
    Mock(PathBuf),
    /// Seeded pseudo-prose, no fixture needed.
    Synthetic(u64),
}

impl std::str::FromStr for TransportChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "live" {
            return Ok(TransportChoice::Live);
        }
        if let Some(path) = s.strip_prefix("mock:") {
            return Ok(TransportChoice::Mock(PathBuf::from(path)));
        }
        if let Some(seed) = s.strip_prefix("synthetic:") {
            return seed
                .parse()
                .map(TransportChoice::Synthetic)
                .map_err(|e| format!("bad seed {seed:?}: {e}"));
        }
        Err(format!(
            "expected live, mock:FIXTURE or synthetic:SEED, got {s:?}"
        ))
    }
}

impl TransportChoice {
    pub fn build(&self) -> Result<Gateway, GatewayError> {
        Ok(match self {
            TransportChoice::Live => Gateway::live_from_env(),
            TransportChoice::Mock(path) => Gateway::new(ScriptedTransport::load(path)?),
            TransportChoice::Synthetic(seed) => Gateway::new(SyntheticTransport::new(*seed)),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub host: String,
    pub store_dir: PathBuf,
    pub transport: TransportChoice,
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("could not bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Storage(#[from] StoreError),
    #[error("transport setup failed: {0}")]
    Transport(#[from] GatewayError),
}

pub struct AppState {
    pub store: SessionStore,
    pub gateway: Gateway,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/import", post(import))
        .route("/sessions/:id", get(export))
        .route("/sessions/:id/export", get(export))
        .route("/sessions/:id/ops", post(apply_op))
        .route("/sessions/:id/prompts", post(issue_prompt))
        .route("/sessions/:id/prompts/:pid/regenerate", post(regenerate))
        .route("/sessions/:id/prompts/:pid/redact", post(redact))
        .route("/sessions/:id/prompts/:pid/ranges", get(prompt_ranges))
        .route("/sessions/:id/stats", get(stats))
        .route("/sessions/:id/timeline", get(timeline))
        .route("/sessions/:id/report", get(report))
        .route("/sessions/:id/check", get(check))
        .route("/suggestions", get(suggestions))
        .with_state(state)
}

pub struct RunningService {
    addr: SocketAddr,
    shutdown: oneshot::Sender<()>,
    handle: JoinHandle<std::io::Result<()>>,
}

impl RunningService {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub async fn shutdown(self) -> std::io::Result<()> {
        let _ = self.shutdown.send(());
        self.handle
            .await
            .unwrap_or_else(|e| Err(std::io::Error::other(e)))
    }

    /// Runs until the server stops on its own.
    pub async fn wait(self) -> std::io::Result<()> {
        let RunningService {
            shutdown, handle, ..
        } = self;
        let out = handle
            .await
            .unwrap_or_else(|e| Err(std::io::Error::other(e)));
        drop(shutdown);
        out
    }
}

/// Loads the store, binds the listener and starts serving in the background.
pub async fn serve(config: ServiceConfig) -> Result<RunningService, ServiceError> {
    let gateway = config.transport.build()?;
    let store_dir = config.store_dir.clone();
    let store = tokio::task::spawn_blocking(move || SessionStore::open(store_dir))
        .await
        .expect("store loader panicked")?;
    let addr = format!("{}:{}", config.host, config.port);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|source| ServiceError::Bind {
            addr: addr.clone(),
            source,
        })?;
    let local = listener
        .local_addr()
        .map_err(|source| ServiceError::Bind { addr, source })?;
    let app = router(Arc::new(AppState { store, gateway }));
    let (tx, rx) = oneshot::channel::<()>();
    let handle = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    tracing::info!(%local, "session service listening");
    Ok(RunningService {
        addr: local,
        shutdown: tx,
        handle,
    })
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl ToString) -> Self {
        ApiError {
            status,
            code,
            message: message.to_string(),
        }
    }

    fn bad_request(message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code,
            message: self.message,
        };
        (self.status, axum::Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "not_found", e),
            StoreError::Session(s) => s.into(),
            StoreError::Storage(_) | StoreError::Corrupt { .. } => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", e)
            }
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let (status, code) = match &e {
            SessionError::RevisionConflict { .. } => (StatusCode::CONFLICT, "revision_conflict"),
            SessionError::UnknownPrompt(_) => (StatusCode::NOT_FOUND, "unknown_prompt"),
            SessionError::AlreadyRedacted(_) => (StatusCode::CONFLICT, "already_redacted"),
            SessionError::Gateway(GatewayError::InvalidRequest(_)) | SessionError::EmptyPrompt => {
                (StatusCode::UNPROCESSABLE_ENTITY, "invalid_request")
            }
            SessionError::Gateway(GatewayError::Timeout) => {
                (StatusCode::GATEWAY_TIMEOUT, "timeout")
            }
            SessionError::Gateway(_) => (StatusCode::BAD_GATEWAY, "provider_error"),
            SessionError::Attribution(_) | SessionError::Log(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "invalid_operation")
            }
        };
        ApiError::new(status, code, e)
    }
}

impl From<ImportError> for ApiError {
    fn from(e: ImportError) -> Self {
        let code = match e {
            ImportError::Parse(_) => "parse_error",
            ImportError::SchemaVersionUnsupported(_) => "schema_version_unsupported",
            ImportError::Integrity(_) => "integrity_error",
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e)
    }
}

impl From<UnsupportedFormat> for ApiError {
    fn from(e: UnsupportedFormat) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "unsupported_format", e)
    }
}

impl From<PolicyError> for ApiError {
    fn from(e: PolicyError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "unknown_policy", e)
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Shared = State<Arc<AppState>>;

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> ApiResult<T> {
    let body = if body.iter().all(u8::is_ascii_whitespace) {
        b"{}"
    } else {
        body
    };
    serde_json::from_slice(body).map_err(ApiError::bad_request)
}

fn json<T: Serialize>(status: StatusCode, value: &T) -> Response {
    (status, axum::Json(value)).into_response()
}

fn session_file(bytes: Vec<u8>) -> Response {
    (
        [(header::CONTENT_TYPE, "application/json; charset=utf-8")],
        bytes,
    )
        .into_response()
}

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e))?
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
}

async fn create_session(State(app): Shared) -> ApiResult<Response> {
    let id = blocking(move || Ok(app.store.create()?)).await?;
    Ok(json(
        StatusCode::CREATED,
        &SessionCreated { session_id: id },
    ))
}

async fn import(State(app): Shared, body: Bytes) -> ApiResult<Response> {
    let id = blocking(move || {
        let state = import_session(&body)?;
        let id = state.session_id().to_owned();
        app.store.insert(state)?;
        Ok(id)
    })
    .await?;
    Ok(json(
        StatusCode::CREATED,
        &SessionCreated { session_id: id },
    ))
}

async fn export(State(app): Shared, Path(id): Path<String>) -> ApiResult<Response> {
    let snapshot = app.store.snapshot(&id)?;
    Ok(session_file(export_session(&snapshot)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OpRequest {
    pub expected_revision: u64,
    pub op: Op,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OpResponse {
    pub revision: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<PromptRecord>,
}

/// Applies `op` at `expected` (or the current revision when absent).
async fn run_op(
    app: Arc<AppState>,
    id: String,
    expected: Option<u64>,
    op: Op,
) -> ApiResult<OpResponse> {
    blocking(move || {
        let applied = app.store.mutate(&id, |s| {
            let rev = expected.unwrap_or(s.revision());
            s.apply_op(rev, op, &app.gateway, now_ms())
        })?;
        Ok(OpResponse {
            revision: applied.revision,
            prompt: applied.prompt,
        })
    })
    .await
}

async fn apply_op(State(app): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let req: OpRequest = parse_body(&body)?;
    let out = run_op(app, id, Some(req.expected_revision), req.op).await?;
    Ok(json(StatusCode::OK, &out))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PromptRequest {
    pub prompt_text: String,
    #[serde(default)]
    pub context_text: Option<String>,
    #[serde(default)]
    pub expected_revision: Option<u64>,
}

async fn issue_prompt(
    State(app): Shared,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let req: PromptRequest = parse_body(&body)?;
    let op = Op::IssuePrompt {
        prompt_text: req.prompt_text,
        context_text: req.context_text,
    };
    let out = run_op(app, id, req.expected_revision, op).await?;
    Ok(json(StatusCode::CREATED, &out.prompt))
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct RegenerateRequest {
    #[serde(default)]
    pub expected_revision: Option<u64>,
}

async fn regenerate(
    State(app): Shared,
    Path((id, pid)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Response> {
    let req: RegenerateRequest = parse_body(&body)?;
    let op = Op::Regenerate {
        prompt_id: PromptId(pid),
    };
    let out = run_op(app, id, req.expected_revision, op).await?;
    Ok(json(StatusCode::CREATED, &out.prompt))
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct RedactRequest {
    #[serde(default)]
    pub acknowledgment: Option<String>,
    #[serde(default)]
    pub expected_revision: Option<u64>,
}

async fn redact(
    State(app): Shared,
    Path((id, pid)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Response> {
    let req: RedactRequest = parse_body(&body)?;
    let op = Op::Redact {
        prompt_id: PromptId(pid),
        acknowledgment: req.acknowledgment,
    };
    let out = run_op(app, id, req.expected_revision, op).await?;
    Ok(json(StatusCode::OK, &out))
}

async fn prompt_ranges(
    State(app): Shared,
    Path((id, pid)): Path<(String, String)>,
) -> ApiResult<Response> {
    let snapshot = app.store.snapshot(&id)?;
    let ranges: Vec<LinkedRange> = snapshot
        .document()
        .ranges_for_prompt(&PromptId(pid))
        .into_iter()
        .map(
            |(start, end, label): (usize, usize, AttributionLabel)| LinkedRange {
                start,
                end,
                label,
            },
        )
        .collect();
    Ok(json(StatusCode::OK, &ranges))
}

async fn stats(State(app): Shared, Path(id): Path<String>) -> ApiResult<Response> {
    let stats: SummaryStats = app.store.snapshot(&id)?.stats();
    Ok(json(StatusCode::OK, &stats))
}

async fn timeline(State(app): Shared, Path(id): Path<String>) -> ApiResult<Response> {
    let glyphs: Vec<TimelineGlyph> = app.store.snapshot(&id)?.timeline();
    Ok(json(StatusCode::OK, &glyphs))
}

#[derive(Debug, Deserialize)]
struct ReportQuery {
    format: Option<String>,
    policy: Option<String>,
}

async fn report(
    State(app): Shared,
    Path(id): Path<String>,
    Query(q): Query<ReportQuery>,
) -> ApiResult<Response> {
    let format: ReportFormat = q.format.as_deref().unwrap_or("markdown").parse()?;
    let snapshot = app.store.snapshot(&id)?;
    let conformance = match q.policy.as_deref() {
        Some(name) => Some(conformance::check(&snapshot, &builtin_policy(name)?)),
        None => None,
    };
    let bytes = DisclosureReport::build(&snapshot, conformance).render(format);
    let content_type = match format {
        ReportFormat::Markdown => "text/markdown; charset=utf-8",
        ReportFormat::Html => "text/html; charset=utf-8",
        ReportFormat::Structured => "application/json; charset=utf-8",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], bytes).into_response())
}

#[derive(Debug, Deserialize)]
struct CheckQuery {
    policy: String,
}

async fn check(
    State(app): Shared,
    Path(id): Path<String>,
    Query(q): Query<CheckQuery>,
) -> ApiResult<Response> {
    let snapshot = app.store.snapshot(&id)?;
    let report = conformance::check(&snapshot, &builtin_policy(&q.policy)?);
    Ok(json(StatusCode::OK, &report))
}

/// Over HTTP only builtin profiles are addressable; files stay a CLI feature.
fn builtin_policy(name: &str) -> Result<conformance::PolicyProfile, PolicyError> {
    conformance::builtin_policies()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| PolicyError::Unknown(name.to_owned()))
}

async fn suggestions() -> Response {
    json(StatusCode::OK, &gateway::suggested_interactions())
}
