//! HTTP JSON API over a directory of brickgen projects.
//!
//! Each project lives in `<root>/<id>/`. Mutating requests are serialized
//! per project (in-process mutex plus the store's writer lock); reads see
//! the last committed files.

mod error;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use brickgen_core::builder::{BuildConfig, ModuleToggles};
use brickgen_core::ingest::{parse_pointlist_str, parse_timeseries_str, parse_timestamp, PointListFormat};
use brickgen_core::matcher::{MatchStats, MatchStatus, Score};
use brickgen_core::pipeline::{self, PipelineError, Resources, Stage};
use brickgen_core::registry::HvacTermRegistry;
use brickgen_core::store::{valid_project_id, Project, ProjectConfig, CONFIG, LAYOUT, MODEL};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use error::ApiError;

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
pub struct AppState {
    root: Arc<PathBuf>,
    writers: Arc<Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>>,
}

impl AppState {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        AppState {
            root: Arc::new(root.into()),
            writers: Arc::default(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn project_dir(&self, id: &str) -> ApiResult<PathBuf> {
        if !valid_project_id(id) {
            return Err(ApiError::not_found(format!("unknown project {id:?}")));
        }
        let dir = self.root.join(id);
        if !dir.join(CONFIG).is_file() {
            return Err(ApiError::not_found(format!("unknown project {id:?}")));
        }
        Ok(dir)
    }

    fn writer(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut map = self.writers.lock().expect("writer map poisoned");
        map.entry(id.to_string()).or_default().clone()
    }

    /// Runs `f` on a blocking thread against the opened project.
    async fn read<T, F>(&self, id: &str, f: F) -> ApiResult<T>
    where
        T: Send + 'static,
        F: FnOnce(&Project) -> ApiResult<T> + Send + 'static,
    {
        let dir = self.project_dir(id)?;
        blocking(move || f(&Project::open(dir)?)).await
    }

    /// Like `read`, holding the project's writer lock.
    async fn write<T, F>(&self, id: &str, f: F) -> ApiResult<T>
    where
        T: Send + 'static,
        F: FnOnce(&mut Project) -> ApiResult<T> + Send + 'static,
    {
        let dir = self.project_dir(id)?;
        let writer = self.writer(id);
        let _guard = writer.lock().await;
        blocking(move || {
            let mut project = Project::open(dir)?;
            let _lock = project.lock()?;
            f(&mut project)
        })
        .await
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed JSON body: {e}")))
}

fn body_text(body: &Bytes) -> ApiResult<String> {
    String::from_utf8(body.to_vec()).map_err(|_| ApiError::bad_request("body is not UTF-8"))
}

pub fn router(state: AppState) -> Router {
    router_with_cors(state, cors_from_env())
}

pub fn router_with_cors(state: AppState, cors: CorsLayer) -> Router {
    Router::new()
        .route("/health", get(|| async { Json(json!({"status": "ok"})) }))
        .route("/projects", post(create_project).get(list_projects))
        .route("/projects/{id}", get(get_project))
        .route("/projects/{id}/pointlist", post(upload_pointlist))
        .route("/projects/{id}/timeseries", post(upload_timeseries))
        .route("/projects/{id}/timeseries/{tsid}", get(get_timeseries))
        .route("/projects/{id}/prefixes", get(get_prefixes))
        .route("/projects/{id}/hvac-terms", put(put_hvac_terms).get(get_hvac_terms))
        .route("/projects/{id}/matches", get(get_matches))
        .route("/projects/{id}/matches/{code}", put(put_match))
        .route("/projects/{id}/graph", post(rebuild_graph))
        .route("/projects/{id}/graph.ttl", get(get_graph_ttl))
        .route("/projects/{id}/validate", post(run_validation))
        .route("/projects/{id}/layout", get(get_layout))
        .route("/projects/{id}/stats", get(get_stats))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .layer(cors)
        .with_state(state)
}

/// Allowed origin from `BRICKGEN_UI_ORIGIN`; any origin when unset.
pub fn cors_from_env() -> CorsLayer {
    let origin = match std::env::var("BRICKGEN_UI_ORIGIN").ok().and_then(|o| o.parse().ok()) {
        Some(o) => AllowOrigin::exact(o),
        None => AllowOrigin::any(),
    };
    CorsLayer::new()
        .allow_origin(origin)
        .allow_methods(tower_http::cors::Any)
        .allow_headers(tower_http::cors::Any)
}

/// Binds and serves until ctrl-c.
pub async fn serve(root: impl Into<PathBuf>, addr: &str) -> std::io::Result<()> {
    let root = root.into();
    std::fs::create_dir_all(&root)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("serving {} on {}", root.display(), listener.local_addr()?);
    axum::serve(listener, router(AppState::new(root)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[derive(Debug, Deserialize)]
struct CreateProject {
    id: String,
    prefix: Option<String>,
    base: Option<String>,
    threshold: Option<f64>,
    toggles: Option<String>,
}

async fn create_project(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: CreateProject = parse_body(&body)?;
    if !valid_project_id(&req.id) {
        return Err(ApiError::bad_request(format!(
            "invalid project id {:?}: use letters, digits, '-' and '_'",
            req.id
        )));
    }
    let defaults = BuildConfig::default();
    let mut build = BuildConfig::new(
        req.prefix.unwrap_or(defaults.prefix),
        req.base.unwrap_or(defaults.base),
    );
    build.base_iri().map_err(|e| ApiError::bad_request(e.to_string()))?;
    if let Some(t) = &req.toggles {
        build.toggles = t.parse::<ModuleToggles>().map_err(ApiError::bad_request)?;
    }
    let mut config = ProjectConfig::new(req.id.clone(), build);
    if let Some(t) = req.threshold {
        config.matching.threshold = Score::from_decimal(t)
            .filter(|_| (0.0..=1.0).contains(&t))
            .ok_or_else(|| ApiError::bad_request(format!("threshold {t} outside 0..1")))?;
    }
    let dir = state.root.join(&req.id);
    let writer = state.writer(&req.id);
    let _guard = writer.lock().await;
    let project = blocking(move || Ok(Project::init(dir, config)?)).await?;
    Ok((StatusCode::CREATED, Json(project.config)).into_response())
}

async fn list_projects(State(state): State<AppState>) -> ApiResult<Json<Vec<String>>> {
    let root = state.root.clone();
    blocking(move || {
        let mut ids = Vec::new();
        if let Ok(entries) = std::fs::read_dir(root.as_path()) {
            for e in entries.flatten() {
                let name = e.file_name().to_string_lossy().into_owned();
                if valid_project_id(&name) && e.path().join(CONFIG).is_file() {
                    ids.push(name);
                }
            }
        }
        ids.sort();
        Ok(Json(ids))
    })
    .await
}

async fn get_project(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    state
        .read(&id, |p| {
            let stages: Vec<&str> = [
                Stage::Ingest,
                Stage::Translate,
                Stage::Tokenize,
                Stage::Match,
                Stage::Layout,
                Stage::Graph,
                Stage::Validate,
            ]
            .into_iter()
            .filter(|s| p.has(s.artifact()))
            .map(Stage::name)
            .collect();
            Ok(Json(json!({"config": p.config, "completed": stages})))
        })
        .await
}

#[derive(Debug, Deserialize)]
struct FormatQuery {
    format: Option<String>,
}

/// Ingests the uploaded list (CSV, or JSON with `?format=json` or a JSON
/// content type) and runs the preparation stages through matching.
async fn upload_pointlist(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<FormatQuery>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let format = match q.format.as_deref() {
        Some(f) => f.parse::<PointListFormat>().map_err(|e| ApiError::bad_request(e.to_string()))?,
        None => {
            let ct = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or("");
            if ct.contains("json") {
                PointListFormat::Json
            } else {
                PointListFormat::Csv
            }
        }
    };
    let mut list = parse_pointlist_str(&body_text(&body)?, format).map_err(|e| ApiError::bad_request(e.to_string()))?;
    list.source = "upload".into();
    state
        .write(&id, move |p| {
            let res = Resources::load(p)?;
            let samples = p.samples()?;
            let ingest = pipeline::ingest(p, &list, &samples)?;
            pipeline::translate(p, &res)?;
            let tokens = pipeline::tokenize(p, &res)?;
            let stats = pipeline::match_points(p, &res)?;
            pipeline::layout(p)?;
            Ok(Json(json!({"ingest": ingest, "terms": tokens.terms, "stats": stats})))
        })
        .await
}

async fn upload_timeseries(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let samples = parse_timeseries_str(&body_text(&body)?).map_err(|e| ApiError::bad_request(e.to_string()))?;
    state
        .write(&id, move |p| {
            let list = p.point_list().map_err(|_| {
                ApiError::from(PipelineError::Missing {
                    stage: Stage::Ingest,
                    prerequisite: Stage::Ingest,
                })
            })?;
            let mut orphans: Vec<String> = brickgen_core::ingest::orphan_samples(&list, &samples)
                .into_iter()
                .map(|s| s.code.clone())
                .collect();
            orphans.dedup();
            p.save_samples(&samples)?;
            Ok(Json(json!({"samples": samples.len(), "orphan_codes": orphans})))
        })
        .await
}

#[derive(Debug, Deserialize)]
struct RangeQuery {
    from: Option<String>,
    to: Option<String>,
}

async fn get_timeseries(
    State(state): State<AppState>,
    UrlPath((id, tsid)): UrlPath<(String, String)>,
    Query(q): Query<RangeQuery>,
) -> ApiResult<Json<Value>> {
    let bound = |v: Option<String>, default: &str| -> ApiResult<_> {
        let s = v.unwrap_or_else(|| default.to_string());
        parse_timestamp(&s).ok_or_else(|| ApiError::bad_request(format!("bad timestamp {s:?}")))
    };
    let from = bound(q.from, "0001-01-01")?;
    let to = bound(q.to, "9999-12-31T23:59:59")?;
    state
        .read(&id, move |p| {
            let samples = p.get_timeseries(&tsid, from, to)?;
            let code = p.timeseries_index()?.code_of(&tsid).map(str::to_string);
            Ok(Json(json!({"id": tsid, "code": code, "samples": samples})))
        })
        .await
}

async fn get_prefixes(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    state
        .read(&id, |p| {
            let res = Resources::load(p)?;
            Ok(Json(json!(pipeline::prefixes(p, &res)?)))
        })
        .await
}

async fn get_hvac_terms(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    state
        .read(&id, |p| Ok(Json(json!(Resources::load(p)?.registry))))
        .await
}

async fn put_hvac_terms(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let registry: HvacTermRegistry = parse_body(&body)?;
    state
        .write(&id, move |p| {
            let mut res = Resources::load(p)?;
            pipeline::update_registry(p, &mut res, registry)?;
            Ok(Json(json!(res.registry)))
        })
        .await
}

#[derive(Debug, Deserialize)]
struct StatusQuery {
    status: Option<String>,
}

async fn get_matches(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<StatusQuery>,
) -> ApiResult<Json<Value>> {
    let filter: Option<MatchStatus> = match q.status.as_deref().unwrap_or("all") {
        "all" => None,
        "nomatch" => Some(MatchStatus::NoMatch),
        "auto" => Some(MatchStatus::Auto),
        "overridden" => Some(MatchStatus::Overridden),
        other => {
            return Err(ApiError::bad_request(format!(
                "status must be one of all, nomatch, auto, overridden (got {other:?})"
            )))
        }
    };
    state
        .read(&id, move |p| {
            let matches: Vec<_> = pipeline::matches(p)?
                .into_iter()
                .filter(|m| filter.is_none_or(|s| m.status == s))
                .collect();
            Ok(Json(json!(matches)))
        })
        .await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverrideBody {
    code: Option<String>,
    class: Option<String>,
    #[serde(default)]
    exclude: bool,
    note: Option<String>,
}

#[derive(Serialize)]
struct OverrideResponse {
    #[serde(rename = "match")]
    result: brickgen_core::matcher::MatchResult,
    decisions: usize,
}

async fn put_match(
    State(state): State<AppState>,
    UrlPath((id, code)): UrlPath<(String, String)>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let req: OverrideBody = parse_body(&body)?;
    if req.code.as_deref().is_some_and(|c| c != code) {
        return Err(ApiError::bad_request("body code does not match the URL"));
    }
    let class = match (req.class, req.exclude) {
        (Some(_), true) => return Err(ApiError::bad_request("give either class or exclude, not both")),
        (None, false) => return Err(ApiError::bad_request("class (or exclude: true) is required")),
        (class, _) => class,
    };
    state
        .write(&id, move |p| {
            let res = Resources::load(p)?;
            let result = pipeline::override_match(p, &res, &code, class.as_deref(), req.note)?;
            let decisions = p.decisions()?.len();
            Ok(Json(json!(OverrideResponse { result, decisions })))
        })
        .await
}

async fn rebuild_graph(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    state
        .write(&id, |p| {
            let res = Resources::load(p)?;
            Ok(Json(json!(pipeline::graph(p, &res)?)))
        })
        .await
}

fn require_artifact(p: &Project, name: &str, stage: Stage) -> ApiResult<()> {
    if p.has(name) {
        Ok(())
    } else {
        Err(PipelineError::Missing {
            stage,
            prerequisite: stage,
        }
        .into())
    }
}

async fn get_graph_ttl(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    state
        .read(&id, |p| {
            require_artifact(p, MODEL, Stage::Graph)?;
            let ttl = p.read_text(MODEL)?;
            Ok(([(header::CONTENT_TYPE, "text/turtle; charset=utf-8")], ttl).into_response())
        })
        .await
}

async fn run_validation(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    state
        .write(&id, |p| {
            let res = Resources::load(p)?;
            Ok(Json(json!(pipeline::validate(p, &res)?)))
        })
        .await
}

async fn get_layout(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    state
        .read(&id, |p| {
            require_artifact(p, LAYOUT, Stage::Layout)?;
            Ok(Json(p.read_json::<Value>(LAYOUT)?))
        })
        .await
}

async fn get_stats(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    state
        .read(&id, |p| {
            let matches = pipeline::matches(p)?;
            let stats = MatchStats::of(&matches);
            let overridden = matches.iter().filter(|m| m.status == MatchStatus::Overridden).count();
            Ok(Json(json!({
                "total": stats.total,
                "matched": stats.matched,
                "nomatch": stats.nomatch,
                "match_rate": stats.match_rate,
                "overridden": overridden,
                "decisions": p.decisions()?.len(),
            })))
        })
        .await
}
