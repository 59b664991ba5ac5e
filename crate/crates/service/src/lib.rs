//! Local HTTP/JSON service over recorded jAlgo traces.
//!
//! Programs are compiled and traced eagerly on `POST /api/programs`; every
//! other endpoint is a read over the immutable record, so the server keeps
//! no per-client cursor. All bodies are canonical JSON.

mod store;

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};
use std::time::{Instant, SystemTime};

use axum::body::{Body, Bytes};
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use jalgo_core::interpreter::{OutputEvent, RuntimeError};
use jalgo_core::session::{next_break, Direction};
use jalgo_core::{compile, wire, RunLimits, Trace, TraceStatus};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

pub use store::{ProgramRecord, ProgramStore};

/// Largest accepted `source`, in bytes.
pub const MAX_SOURCE_BYTES: usize = 1024 * 1024;
/// Request bodies above this are refused before parsing.
const MAX_BODY_BYTES: usize = 8 * MAX_SOURCE_BYTES;
pub const MAX_PAGE: usize = 1000;
pub const DEFAULT_PAGE: usize = 100;

#[derive(Debug, Default)]
pub struct AppState {
    programs: Mutex<ProgramStore>,
}

impl AppState {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    fn get(&self, id: &str) -> Option<Arc<ProgramRecord>> {
        self.programs.lock().expect("store lock poisoned").get(id)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/programs", post(create_program))
        .route("/api/programs/{id}", get(program_meta))
        .route("/api/programs/{id}/frames", get(program_frames))
        .route("/api/programs/{id}/next-break", get(program_next_break))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "no such endpoint") })
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .layer(CorsLayer::permissive())
        .layer(middleware::from_fn(log_request))
        .with_state(state)
}

/// Serves until the listener fails or the future is dropped.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn log_request(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let uri = req.uri().clone();
    let started = Instant::now();
    let response = next.run(req).await;
    log::info!(
        "{method} {uri} -> {} ({:.1} ms)",
        response.status().as_u16(),
        started.elapsed().as_secs_f64() * 1000.0
    );
    response
}

fn json(status: StatusCode, body: String) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, "application/json")],
        Body::from(body),
    )
        .into_response()
}

/// A failed request, rendered as `{"error": message}`.
#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

#[derive(Serialize)]
struct Problem<'a> {
    error: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json(
            self.status,
            wire::to_canonical(&Problem {
                error: &self.message,
            }),
        )
    }
}

type ApiResult = Result<Response, ApiError>;

#[derive(Deserialize)]
struct CreateRequest {
    source: String,
    max_frames: Option<i64>,
    max_nodes: Option<i64>,
}

#[derive(Serialize)]
struct Created<'a> {
    program_id: &'a str,
    frame_count: usize,
    status: TraceStatus,
    error: &'a Option<RuntimeError>,
}

#[derive(Serialize)]
struct Meta<'a> {
    program_id: &'a str,
    source: &'a str,
    frame_count: usize,
    status: TraceStatus,
    error: &'a Option<RuntimeError>,
    output: &'a [OutputEvent],
}

#[derive(Serialize)]
struct BreakIndex {
    index: usize,
}

fn limit(value: Option<i64>, default: usize, name: &str) -> Result<usize, ApiError> {
    match value {
        None => Ok(default),
        Some(n) if n >= 1 => Ok(usize::try_from(n).unwrap_or(usize::MAX)),
        Some(n) => Err(ApiError::bad_request(format!(
            "{name} must be at least 1, got {n}"
        ))),
    }
}

async fn create_program(
    State(state): State<Arc<AppState>>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult {
    let body =
        body.map_err(|rejection| ApiError::new(rejection.status(), rejection.body_text()))?;
    let request: CreateRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request(format!("malformed request: {e}")))?;
    if request.source.len() > MAX_SOURCE_BYTES {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("source exceeds {MAX_SOURCE_BYTES} bytes"),
        ));
    }
    let limits = RunLimits::new(
        limit(
            request.max_frames,
            RunLimits::DEFAULT_MAX_FRAMES,
            "max_frames",
        )?,
        limit(request.max_nodes, RunLimits::DEFAULT_MAX_NODES, "max_nodes")?,
    );

    let compiled = match compile(&request.source) {
        Ok(c) => c,
        Err(errors) => {
            return Ok(json(
                StatusCode::UNPROCESSABLE_ENTITY,
                wire::compile_errors_document(&errors),
            ))
        }
    };
    let trace = compiled.run(limits);
    let record = state.programs.lock().expect("store lock poisoned").insert(
        request.source,
        trace,
        SystemTime::now(),
    );
    Ok(json(
        StatusCode::CREATED,
        wire::to_canonical(&Created {
            program_id: &record.program_id,
            frame_count: record.trace.frames.len(),
            status: record.trace.status,
            error: &record.trace.error,
        }),
    ))
}

fn lookup(state: &AppState, id: &str) -> Result<Arc<ProgramRecord>, ApiError> {
    state
        .get(id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown program `{id}`")))
}

async fn program_meta(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let record = lookup(&state, &id)?;
    let trace: &Trace = &record.trace;
    Ok(json(
        StatusCode::OK,
        wire::to_canonical(&Meta {
            program_id: &record.program_id,
            source: &record.source,
            frame_count: trace.frames.len(),
            status: trace.status,
            error: &trace.error,
            output: &trace.output,
        }),
    ))
}

fn query_usize(query: &HashMap<String, String>, key: &str) -> Result<Option<usize>, ApiError> {
    match query.get(key) {
        None => Ok(None),
        Some(raw) => raw.parse().map(Some).map_err(|_| {
            ApiError::bad_request(format!(
                "`{key}` must be a non-negative integer, got `{raw}`"
            ))
        }),
    }
}

async fn program_frames(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult {
    let record = lookup(&state, &id)?;
    let from = query_usize(&query, "from")?.unwrap_or(0);
    let count = query_usize(&query, "count")?.unwrap_or(DEFAULT_PAGE);
    if !(1..=MAX_PAGE).contains(&count) {
        return Err(ApiError::bad_request(format!(
            "`count` must be between 1 and {MAX_PAGE}"
        )));
    }
    let frames = &record.trace.frames;
    if from >= frames.len() {
        return Err(ApiError::new(
            StatusCode::RANGE_NOT_SATISFIABLE,
            format!("`from` must be below the frame count {}", frames.len()),
        ));
    }
    let end = from.saturating_add(count).min(frames.len());
    Ok(json(
        StatusCode::OK,
        wire::frames_document(&frames[from..end]),
    ))
}

fn parse_lines(raw: &str) -> Result<BTreeSet<u32>, String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<u32>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!(
                "breakpoint lines must be positive integers, got `{s}`"
            )),
        })
        .collect()
}

async fn program_next_break(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult {
    let record = lookup(&state, &id)?;
    let frames = &record.trace.frames;
    let from = match query_usize(&query, "from")? {
        Some(from) if from < frames.len() => from,
        Some(from) => {
            return Err(ApiError::bad_request(format!(
                "`from` {from} is not a frame index (frame count {})",
                frames.len()
            )))
        }
        None => return Err(ApiError::bad_request("`from` is required")),
    };
    let direction = match query.get("dir") {
        None => Direction::Forward,
        Some(d) => d.parse().map_err(ApiError::bad_request)?,
    };
    let lines = parse_lines(query.get("lines").map_or("", String::as_str))
        .map_err(ApiError::bad_request)?;
    let index = next_break(frames, from, direction, &lines);
    Ok(json(
        StatusCode::OK,
        wire::to_canonical(&BreakIndex { index }),
    ))
}
