//! The `/api/v1` HTTP surface.

use std::collections::BTreeSet;
use std::convert::Infallible;
use std::path::PathBuf;

use axum::extract::{Path, Query, Request, State};
use axum::http::{HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use futures::{Stream, StreamExt};
use serde::{Deserialize, Serialize};

use dspace_core::explorer::{
    assign_layout_with, filter_nodes_with, level_payload, resolve_level, search_keyword_with,
    AxisSelection, LayoutAssignment, LevelPayload, SearchPartition, SearchScope, SemanticLevel,
    Viewport,
};
use dspace_core::model::{DesignSpace, GenerationConfig, NodeId, SpaceId, SubspaceFilter};
use dspace_core::pipeline::Pipeline;
use dspace_core::store::{DocumentDelta, EditorDocument, ExplorationState, Store, SwitchDelta};
use dspace_core::Executor;

use crate::error::ApiError;
use crate::runs::RunId;
use crate::state::Shared;

pub const API_PREFIX: &str = "/api/v1";
/// Declared on every response; requests may send it and must then match.
pub const SCHEMA_HEADER: &str = "x-schema-version";
pub const SCHEMA_VERSION: &str = "1";

type ApiResult<T> = Result<T, ApiError>;

/// A served endpoint and the engine operations reachable through it.
pub struct Endpoint {
    pub method: &'static str,
    pub path: &'static str,
    pub operations: &'static [&'static str],
}

const fn ep(
    method: &'static str,
    path: &'static str,
    operations: &'static [&'static str],
) -> Endpoint {
    Endpoint {
        method,
        path,
        operations,
    }
}

pub const ENDPOINTS: &[Endpoint] = &[
    ep(
        "POST",
        "/spaces",
        &[
            "create_space",
            "generate_space",
            "generate_dimensions",
            "sample_requirement",
            "generate_node",
        ],
    ),
    ep("GET", "/runs/{run}/events", &["stream_run"]),
    ep("GET", "/spaces", &["list_spaces"]),
    ep("GET", "/spaces/{space}", &["get_space"]),
    ep("POST", "/spaces/{space}/active", &["switch_space"]),
    ep("PUT", "/spaces/{space}/exploration", &["set_exploration"]),
    ep(
        "POST",
        "/spaces/{space}/nodes/{node}/similar",
        &["generate_similar"],
    ),
    ep(
        "POST",
        "/spaces/{space}/subspace-generate",
        &["generate_in_subspace"],
    ),
    ep(
        "POST",
        "/spaces/{space}/dimensions",
        &["add_user_dimension"],
    ),
    ep(
        "POST",
        "/spaces/{space}/dimensions/suggest",
        &["suggest_new_dimension"],
    ),
    ep("GET", "/spaces/{space}/search", &["search_keyword"]),
    ep("POST", "/spaces/{space}/filter", &["filter_nodes"]),
    ep("POST", "/spaces/{space}/layout", &["assign_layout"]),
    ep(
        "GET",
        "/spaces/{space}/nodes/{node}/payload",
        &["resolve_level", "level_payload"],
    ),
    ep(
        "POST",
        "/spaces/{space}/nodes/{node}/bookmark",
        &["toggle_bookmark"],
    ),
    ep(
        "POST",
        "/spaces/{space}/nodes/{node}/select",
        &["select_node"],
    ),
    ep("GET", "/document", &["get_document"]),
    ep("PUT", "/document", &["set_document"]),
    ep("PUT", "/document/blocks/{block}", &["edit_block"]),
    ep("POST", "/store/save", &["save"]),
    ep("POST", "/store/load", &["load"]),
];

pub fn router(state: Shared) -> Router {
    let api = Router::new()
        .route("/spaces", post(create_space).get(list_spaces))
        .route("/runs/{run}/events", get(run_events))
        .route("/spaces/{space}", get(get_space))
        .route("/spaces/{space}/active", post(switch_space))
        .route("/spaces/{space}/exploration", put(set_exploration))
        .route("/spaces/{space}/nodes/{node}/similar", post(similar))
        .route("/spaces/{space}/subspace-generate", post(subspace))
        .route("/spaces/{space}/dimensions", post(add_dimension))
        .route(
            "/spaces/{space}/dimensions/suggest",
            post(suggest_dimension),
        )
        .route("/spaces/{space}/search", get(search))
        .route("/spaces/{space}/filter", post(filter))
        .route("/spaces/{space}/layout", post(layout))
        .route("/spaces/{space}/nodes/{node}/payload", get(payload))
        .route("/spaces/{space}/nodes/{node}/bookmark", post(bookmark))
        .route("/spaces/{space}/nodes/{node}/select", post(select))
        .route("/document", get(get_document).put(put_document))
        .route("/document/blocks/{block}", put(edit_block))
        .route("/store/save", post(save_store))
        .route("/store/load", post(load_store));
    Router::new()
        .nest(API_PREFIX, api)
        .fallback(|| async { ApiError::not_found("no such route") })
        .layer(middleware::from_fn(schema_version))
        .with_state(state)
}

async fn schema_version(req: Request, next: Next) -> Response {
    if let Some(v) = req.headers().get(SCHEMA_HEADER) {
        if v.as_bytes() != SCHEMA_VERSION.as_bytes() {
            let msg = format!(
                "unsupported schema version {:?}",
                String::from_utf8_lossy(v.as_bytes())
            );
            return with_schema(ApiError::bad_request(msg).into_response());
        }
    }
    with_schema(next.run(req).await)
}

fn with_schema(mut res: Response) -> Response {
    res.headers_mut()
        .insert(SCHEMA_HEADER, HeaderValue::from_static(SCHEMA_VERSION));
    res
}

fn space_id(raw: u64) -> SpaceId {
    SpaceId(raw)
}

fn read_space(state: &Shared, id: SpaceId) -> ApiResult<DesignSpace> {
    Ok(state.store.read().space(id)?.clone())
}

fn check_node(space: &DesignSpace, node: &NodeId) -> ApiResult<()> {
    match space.node(node) {
        Some(_) => Ok(()),
        None => Err(ApiError::not_found(format!(
            "unknown node {node} in space {}",
            space.id
        ))),
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Started {
    run_id: RunId,
    space_id: SpaceId,
}

fn accepted(run_id: RunId, space_id: SpaceId) -> (StatusCode, Json<Started>) {
    (StatusCode::ACCEPTED, Json(Started { run_id, space_id }))
}

#[derive(Deserialize)]
struct CreateSpace {
    prompt: String,
    #[serde(default)]
    context: Option<String>,
    #[serde(default)]
    highlight: Option<String>,
    #[serde(default)]
    config: Option<GenerationConfig>,
}

async fn create_space(
    State(state): State<Shared>,
    Json(body): Json<CreateSpace>,
) -> ApiResult<impl IntoResponse> {
    if body.prompt.trim().is_empty() {
        return Err(ApiError::bad_request("prompt must not be empty"));
    }
    let pipeline = match body.config {
        Some(cfg) => Pipeline::new(state.pipeline.provider().clone(), cfg)?,
        None => state.pipeline.clone(),
    };
    let space = DesignSpace::new(body.prompt).with_context(
        body.context.unwrap_or_default(),
        body.highlight.unwrap_or_default(),
    );
    let id = state.store.write().create_space(space)?;
    let run = state.spawn_job(
        id,
        pipeline,
        Box::new(|p, space, sink| p.generate_space(space, &sink).map(drop)),
    );
    Ok(accepted(run, id))
}

async fn run_events(
    State(state): State<Shared>,
    Path(run): Path<u64>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let feed = state
        .runs
        .get(RunId(run))
        .ok_or_else(|| ApiError::not_found(format!("unknown run {run}")))?;
    let stream = feed.subscribe().map(|(index, event)| {
        Ok(Event::default()
            .event(event.name())
            .id(index.to_string())
            .json_data(&event)
            .expect("events serialize"))
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SpaceSummary {
    id: SpaceId,
    prompt: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    parent: Option<SpaceId>,
    dimension_count: usize,
    node_count: usize,
    active: bool,
}

async fn list_spaces(State(state): State<Shared>) -> Json<Vec<SpaceSummary>> {
    let store = state.store.read();
    Json(
        store
            .spaces()
            .map(|s| SpaceSummary {
                id: s.id,
                prompt: s.prompt.clone(),
                parent: s.parent,
                dimension_count: s.dimensions.len(),
                node_count: s.nodes.len(),
                active: store.active() == Some(s.id),
            })
            .collect(),
    )
}

#[derive(Serialize)]
struct SpaceView {
    space: DesignSpace,
    exploration: ExplorationState,
}

async fn get_space(State(state): State<Shared>, Path(id): Path<u64>) -> ApiResult<Json<SpaceView>> {
    let store = state.store.read();
    let id = space_id(id);
    Ok(Json(SpaceView {
        space: store.space(id)?.clone(),
        exploration: store.exploration(id)?.clone(),
    }))
}

async fn switch_space(
    State(state): State<Shared>,
    Path(id): Path<u64>,
) -> ApiResult<Json<SwitchDelta>> {
    Ok(Json(state.store.write().switch_space(space_id(id))?))
}

async fn set_exploration(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(body): Json<ExplorationState>,
) -> ApiResult<Json<ExplorationState>> {
    state
        .store
        .write()
        .set_exploration(space_id(id), body.clone())?;
    Ok(Json(body))
}

#[derive(Deserialize, Default)]
struct Count {
    #[serde(default)]
    k: Option<usize>,
}

fn batch_size(state: &Shared, k: Option<usize>) -> ApiResult<usize> {
    match k.unwrap_or(state.pipeline.config().similar_count) {
        0 => Err(ApiError::bad_request("k must be at least 1")),
        k => Ok(k),
    }
}

async fn similar(
    State(state): State<Shared>,
    Path((id, node)): Path<(u64, String)>,
    body: Option<Json<Count>>,
) -> ApiResult<impl IntoResponse> {
    let id = space_id(id);
    let node = NodeId::from(node.as_str());
    check_node(&read_space(&state, id)?, &node)?;
    let k = batch_size(&state, body.unwrap_or_default().0.k)?;
    let run = state.spawn_job(
        id,
        state.pipeline.clone(),
        Box::new(move |p, space, sink| p.generate_similar(space, &node, k, &sink).map(drop)),
    );
    Ok(accepted(run, id))
}

#[derive(Deserialize)]
struct SubspaceBody {
    filter: SubspaceFilter,
    #[serde(default)]
    k: Option<usize>,
}

async fn subspace(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(body): Json<SubspaceBody>,
) -> ApiResult<impl IntoResponse> {
    let id = space_id(id);
    let space = read_space(&state, id)?;
    if body.filter.bookmarked_only {
        return Err(ApiError::bad_request(
            "a bookmark filter does not constrain generation",
        ));
    }
    body.filter.validate(&space)?;
    if space.dimensions.is_empty() {
        return Err(ApiError::bad_request("space has no dimensions"));
    }
    let k = batch_size(&state, body.k)?;
    let filter = body.filter;
    let run = state.spawn_job(
        id,
        state.pipeline.clone(),
        Box::new(move |p, space, sink| p.generate_in_subspace(space, &filter, k, &sink).map(drop)),
    );
    Ok(accepted(run, id))
}

#[derive(Deserialize)]
struct DimensionBody {
    name: String,
}

async fn add_dimension(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(body): Json<DimensionBody>,
) -> ApiResult<impl IntoResponse> {
    let id = space_id(id);
    let space = read_space(&state, id)?;
    let name = body.name.trim().to_string();
    if name.is_empty() {
        return Err(ApiError::bad_request("dimension name must not be empty"));
    }
    if space.find_dimension(&name).is_some() {
        return Err(ApiError::bad_request(format!(
            "dimension {name:?} already exists"
        )));
    }
    let run = state.spawn_job(
        id,
        state.pipeline.clone(),
        Box::new(move |p, space, sink| p.add_user_dimension(space, &name, &sink).map(drop)),
    );
    Ok(accepted(run, id))
}

#[derive(Serialize)]
struct Suggestion {
    name: String,
}

async fn suggest_dimension(
    State(state): State<Shared>,
    Path(id): Path<u64>,
) -> ApiResult<Json<Suggestion>> {
    let space = read_space(&state, space_id(id))?;
    let pipeline = state.pipeline.clone();
    let name = tokio::task::spawn_blocking(move || pipeline.suggest_new_dimension(&space))
        .await
        .map_err(|e| ApiError::bad_request(e.to_string()))??;
    Ok(Json(Suggestion { name }))
}

#[derive(Deserialize)]
struct SearchQuery {
    #[serde(default)]
    q: String,
    #[serde(default)]
    scope: SearchScope,
}

async fn search(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Query(query): Query<SearchQuery>,
) -> ApiResult<Json<SearchPartition>> {
    let store = state.store.read();
    let space = store.space(space_id(id))?;
    Ok(Json(search_keyword_with(
        &Executor::default(),
        space,
        &query.q,
        query.scope,
    )))
}

#[derive(Deserialize)]
struct FilterBody {
    filter: SubspaceFilter,
}

#[derive(Serialize)]
struct FilterResult {
    nodes: BTreeSet<NodeId>,
}

async fn filter(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(body): Json<FilterBody>,
) -> ApiResult<Json<FilterResult>> {
    let store = state.store.read();
    let space = store.space(space_id(id))?;
    let nodes = filter_nodes_with(&Executor::default(), space, &body.filter)?;
    Ok(Json(FilterResult { nodes }))
}

#[derive(Deserialize)]
struct LayoutBody {
    #[serde(default)]
    selection: AxisSelection,
    #[serde(default)]
    visible: Option<BTreeSet<NodeId>>,
    #[serde(default)]
    viewport: Option<Viewport>,
    #[serde(default)]
    seed: u64,
}

async fn layout(
    State(state): State<Shared>,
    Path(id): Path<u64>,
    Json(body): Json<LayoutBody>,
) -> ApiResult<Json<LayoutAssignment>> {
    let store = state.store.read();
    let space = store.space(space_id(id))?;
    let out = assign_layout_with(
        &Executor::default(),
        space,
        &body.selection,
        body.visible.as_ref(),
        body.viewport.unwrap_or_default(),
        body.seed,
    )?;
    Ok(Json(out))
}

#[derive(Deserialize)]
struct PayloadQuery {
    #[serde(default)]
    scale: Option<f64>,
    #[serde(default)]
    level: Option<SemanticLevel>,
}

async fn payload(
    State(state): State<Shared>,
    Path((id, node)): Path<(u64, String)>,
    Query(query): Query<PayloadQuery>,
) -> ApiResult<Json<LevelPayload>> {
    let level = match (query.level, query.scale) {
        (Some(level), _) => level,
        (None, Some(scale)) => resolve_level(scale),
        (None, None) => return Err(ApiError::bad_request("give either scale or level")),
    };
    let store = state.store.read();
    let space = store.space(space_id(id))?;
    let node = space
        .node(&NodeId::from(node.as_str()))
        .ok_or_else(|| ApiError::not_found(format!("unknown node {node}")))?;
    Ok(Json(level_payload(node, level)))
}

#[derive(Serialize)]
struct Bookmark {
    bookmarked: bool,
}

async fn bookmark(
    State(state): State<Shared>,
    Path((id, node)): Path<(u64, String)>,
) -> ApiResult<Json<Bookmark>> {
    let bookmarked = state
        .store
        .write()
        .toggle_bookmark(space_id(id), &NodeId::from(node.as_str()))?;
    Ok(Json(Bookmark { bookmarked }))
}

async fn select(
    State(state): State<Shared>,
    Path((id, node)): Path<(u64, String)>,
) -> ApiResult<Json<DocumentDelta>> {
    let delta = state
        .store
        .write()
        .select_node(space_id(id), &NodeId::from(node.as_str()))?;
    Ok(Json(delta))
}

async fn get_document(State(state): State<Shared>) -> Json<EditorDocument> {
    Json(state.store.read().document().clone())
}

async fn put_document(
    State(state): State<Shared>,
    Json(doc): Json<EditorDocument>,
) -> ApiResult<Json<EditorDocument>> {
    state.store.write().set_document(doc.clone())?;
    Ok(Json(doc))
}

#[derive(Deserialize)]
struct BlockText {
    text: String,
}

async fn edit_block(
    State(state): State<Shared>,
    Path(block): Path<u64>,
    Json(body): Json<BlockText>,
) -> ApiResult<Json<DocumentDelta>> {
    Ok(Json(state.store.write().edit_block(block, &body.text)?))
}

#[derive(Deserialize, Default)]
struct PathBody {
    #[serde(default)]
    path: Option<PathBuf>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct StoreInfo {
    path: PathBuf,
    space_count: usize,
}

fn store_path(state: &Shared, body: Option<Json<PathBody>>) -> ApiResult<PathBuf> {
    body.and_then(|b| b.0.path)
        .or_else(|| state.store_path.clone())
        .ok_or_else(|| ApiError::bad_request("no store path configured; pass one in the body"))
}

async fn save_store(
    State(state): State<Shared>,
    body: Option<Json<PathBody>>,
) -> ApiResult<Json<StoreInfo>> {
    let path = store_path(&state, body)?;
    let snapshot = state.store.read().clone();
    snapshot.save(&path)?;
    Ok(Json(StoreInfo {
        path,
        space_count: snapshot.spaces().count(),
    }))
}

async fn load_store(
    State(state): State<Shared>,
    body: Option<Json<PathBody>>,
) -> ApiResult<Json<StoreInfo>> {
    let path = store_path(&state, body)?;
    let loaded = Store::load(&path)?;
    let space_count = loaded.spaces().count();
    *state.store.write() = loaded;
    Ok(Json(StoreInfo { path, space_count }))
}
