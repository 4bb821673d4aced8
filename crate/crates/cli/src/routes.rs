//! `/v1` HTTP endpoints.

use std::collections::HashMap;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Query as UrlQuery, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;
use wordrefit_core::viz::{Graph, ProjectedPoint};
use wordrefit_core::{
    display_token, distance_matrix, neighbor_graph, project_2d, search, LogEntry, ModelFormat, Query, QueryMode,
    RefitReport, RefitRequest,
};

use crate::error::ApiError;
use crate::state::SharedState;

type ApiResult<T> = Result<Json<T>, ApiError>;
type Params = UrlQuery<HashMap<String, String>>;

pub fn router(state: SharedState) -> Router {
    let api = Router::new()
        .route("/v1/model/info", get(model_info))
        .route("/v1/model/save", post(save_model))
        .route("/v1/search", get(search_handler))
        .route("/v1/refit", post(refit_handler))
        .route("/v1/viz/graph", get(viz_graph))
        .route("/v1/viz/projection", get(viz_projection))
        .route("/v1/viz/matrix", get(viz_matrix))
        .route("/v1/history", get(history))
        .route("/v1/history/undo", post(undo_handler));
    let api = match &state.config.ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    api.layer(CorsLayer::permissive()).with_state(state)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelInfo {
    pub vocab_size: usize,
    pub dims: usize,
    pub revision: u64,
    pub source: String,
    pub refit_count: usize,
}

async fn model_info(State(state): State<SharedState>) -> Json<ModelInfo> {
    let refit_count = state.refit_count();
    let model = state.read_model();
    Json(ModelInfo {
        vocab_size: model.len(),
        dims: model.dims(),
        revision: model.revision(),
        source: state.source.clone(),
        refit_count,
    })
}

/// A hit with its display form: underscores shown as spaces, score rounded
/// to four decimals.
#[derive(Debug, Serialize, Deserialize)]
pub struct HitView {
    pub token: String,
    pub label: String,
    pub score: f64,
    pub display: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SearchResponse {
    pub revision: u64,
    pub query: Query,
    pub hits: Vec<HitView>,
}

fn split_list(raw: Option<&String>, field: &str) -> Result<Vec<String>, ApiError> {
    let raw = raw.ok_or_else(|| ApiError::bad_query(format!("missing `{field}`")))?;
    let items: Vec<String> = raw.split(',').map(|t| t.trim().to_string()).collect();
    if items.iter().any(String::is_empty) {
        return Err(ApiError::bad_query(format!("empty entry in `{field}`")));
    }
    Ok(items)
}

fn parse_query(params: &HashMap<String, String>, default_k: usize) -> Result<Query, ApiError> {
    let mode: QueryMode = params
        .get("mode")
        .map(|m| m.parse())
        .transpose()
        .map_err(ApiError::bad_query)?
        .unwrap_or(QueryMode::Single);
    let terms = split_list(params.get("terms"), "terms")?;
    let k = match params.get("k") {
        Some(k) => k.parse().map_err(|_| ApiError::bad_query("k must be a positive integer").with_detail(k))?,
        None => default_k,
    };
    let exclude = match params.get("exclude").map(String::as_str) {
        None => true,
        Some("true" | "1" | "yes") => true,
        Some("false" | "0" | "no") => false,
        Some(other) => return Err(ApiError::bad_query("exclude must be true or false").with_detail(other)),
    };
    let q = Query::new(mode, terms)?.with_k(k).with_exclude_inputs(exclude);
    q.validate()?;
    Ok(q)
}

async fn search_handler(State(state): State<SharedState>, UrlQuery(params): Params) -> ApiResult<SearchResponse> {
    let q = parse_query(&params, state.config.default_k)?;
    let results = search(&state.read_model(), &q)?;
    Ok(Json(SearchResponse {
        revision: results.revision,
        query: results.query,
        hits: results
            .hits
            .into_iter()
            .map(|h| HitView {
                label: display_token(&h.token),
                display: format!("{:.4}", h.score),
                token: h.token,
                score: h.score,
            })
            .collect(),
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RefitResponse {
    pub revision: u64,
    pub report: RefitReport,
}

async fn refit_handler(
    State(state): State<SharedState>,
    body: Result<Json<RefitRequest>, JsonRejection>,
) -> ApiResult<RefitResponse> {
    let Json(request) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let guard = state.try_writer()?;
    let report = tokio::task::spawn_blocking(move || {
        let _guard = guard;
        state.refit(&request)
    })
    .await
    .map_err(|e| ApiError::io(format!("refit task failed: {e}")))??;
    Ok(Json(RefitResponse {
        revision: report.revisions.after,
        report,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GraphResponse {
    pub revision: u64,
    #[serde(flatten)]
    pub graph: Graph,
}

async fn viz_graph(State(state): State<SharedState>, UrlQuery(params): Params) -> ApiResult<GraphResponse> {
    let q = parse_query(&params, state.config.default_k)?;
    let depth = match params.get("depth") {
        Some(d) => d.parse().map_err(|_| ApiError::bad_query("depth must be 1 or 2").with_detail(d))?,
        None => 1,
    };
    let model = state.read_model();
    let graph = neighbor_graph(&model, &q, depth)?;
    Ok(Json(GraphResponse {
        revision: model.revision(),
        graph,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProjectionResponse {
    pub revision: u64,
    pub points: Vec<ProjectedPoint>,
}

async fn viz_projection(State(state): State<SharedState>, UrlQuery(params): Params) -> ApiResult<ProjectionResponse> {
    let tokens = split_list(params.get("tokens"), "tokens")?;
    let model = state.read_model();
    let points = project_2d(&model, &tokens)?;
    Ok(Json(ProjectionResponse {
        revision: model.revision(),
        points,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixResponse {
    pub revision: u64,
    pub tokens: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

async fn viz_matrix(State(state): State<SharedState>, UrlQuery(params): Params) -> ApiResult<MatrixResponse> {
    let tokens = split_list(params.get("tokens"), "tokens")?;
    let model = state.read_model();
    let m = distance_matrix(&model, &tokens)?;
    Ok(Json(MatrixResponse {
        revision: model.revision(),
        tokens: m.tokens,
        values: m.values,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HistoryResponse {
    pub revision: u64,
    pub entries: Vec<LogEntry>,
}

async fn history(State(state): State<SharedState>) -> Json<HistoryResponse> {
    let log = state.log_snapshot();
    Json(HistoryResponse {
        revision: state.read_model().revision(),
        entries: log.entries().to_vec(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RevisionResponse {
    pub revision: u64,
}

async fn undo_handler(State(state): State<SharedState>) -> ApiResult<RevisionResponse> {
    let guard = state.try_writer()?;
    let revision = tokio::task::spawn_blocking(move || {
        let _guard = guard;
        state.undo()
    })
    .await
    .map_err(|e| ApiError::io(format!("undo task failed: {e}")))??;
    Ok(Json(RevisionResponse { revision }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SaveRequest {
    #[serde(default)]
    pub format: ModelFormat,
    pub name: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SaveResponse {
    pub revision: u64,
    pub path: String,
    pub format: ModelFormat,
}

async fn save_model(
    State(state): State<SharedState>,
    body: Result<Json<SaveRequest>, JsonRejection>,
) -> ApiResult<SaveResponse> {
    let Json(req) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let format = req.format;
    let (path, revision) = tokio::task::spawn_blocking(move || state.save_checkpoint(&req.name, format))
        .await
        .map_err(|e| ApiError::io(format!("save task failed: {e}")))??;
    Ok(Json(SaveResponse {
        revision,
        path: path.display().to_string(),
        format,
    }))
}
