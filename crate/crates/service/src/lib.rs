//! HTTP facade: recommendations, binning, rule tables and rendering as JSON/SVG
//! endpoints. The only state is a content-addressed cache of uploaded datasets.

mod cache;

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use bivmap::data_model::{BinningScheme, DataError, Dataset};
use bivmap::knowledge_base::{KnowledgeBase, TableId};
use bivmap::recommender::{recommend, DesignRequest, RecommendError};
use bivmap::renderer::{
    CvSpec, DatasetRef, InlineDataset, RenderRequest, RenderRequestError, Rendered,
};

pub use cache::{DatasetCache, DEFAULT_CAPACITY_BYTES};

pub const API_SCHEMA: &str = "bivmap-api/1";
pub const CHECKSUM_HEADER: &str = "x-knowledge-base-checksum";
pub const SCHEMA_HEADER: &str = "x-schema-version";
pub const DEFAULT_PORT: u16 = 8787;

const BODY_LIMIT: usize = 64 * 1024 * 1024;

#[derive(Clone)]
pub struct AppState {
    kb: Arc<KnowledgeBase>,
    cache: Arc<Mutex<DatasetCache>>,
}

impl AppState {
    pub fn new(kb: KnowledgeBase, cache_bytes: usize) -> Self {
        Self {
            kb: Arc::new(kb),
            cache: Arc::new(Mutex::new(DatasetCache::new(cache_bytes))),
        }
    }

    pub fn bundled() -> Self {
        Self::new(KnowledgeBase::bundled().clone(), DEFAULT_CAPACITY_BYTES)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: &'a str,
    payload: T,
}

fn envelope<T: Serialize>(status: StatusCode, payload: T) -> Response {
    let body = serde_json::to_vec(&Envelope {
        schema_version: API_SCHEMA,
        payload,
    })
    .expect("payload serializes");
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub status: u16,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    field: Option<String>,
    message: String,
}

impl ApiError {
    fn bad_request(field: Option<String>, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            field,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            field: None,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        envelope(
            self.status,
            serde_json::json!({ "error": ErrorRecord {
                status: self.status.as_u16(),
                field: self.field,
                message: self.message,
            }}),
        )
    }
}

impl From<RecommendError> for ApiError {
    fn from(e: RecommendError) -> Self {
        match e {
            RecommendError::InvalidRequest { field, message } => {
                ApiError::bad_request(Some(field.clone()), format!("{field}: {message}"))
            }
            other => ApiError::bad_request(None, other.to_string()),
        }
    }
}

impl From<RenderRequestError> for ApiError {
    fn from(e: RenderRequestError) -> Self {
        match e {
            RenderRequestError::Invalid { field, message } => {
                ApiError::bad_request(Some(field.clone()), format!("{field}: {message}"))
            }
            other => ApiError::bad_request(None, other.to_string()),
        }
    }
}

fn data_error(field: &str, e: DataError) -> ApiError {
    ApiError::bad_request(Some(field.to_string()), format!("{field}: {e}"))
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &str) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_str(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." {
            "body".to_string()
        } else {
            path
        };
        let message = format!("{field}: {}", e.into_inner());
        ApiError::bad_request(Some(field), message)
    })
}

/// Builds the router over `state`. Every response carries the knowledge-base checksum.
pub fn router(state: AppState) -> Router {
    let checksum = HeaderValue::from_str(state.kb.checksum()).expect("hex checksum");
    Router::new()
        .route("/", get(index))
        .route("/api/v1/health", get(health))
        .route("/api/v1/recommend", post(handle_recommend))
        .route("/api/v1/bin", post(handle_bin))
        .route("/api/v1/render/map", post(handle_render_map))
        .route("/api/v1/render/legend", post(handle_render_legend))
        .route("/api/v1/datasets", post(handle_upload))
        .route("/api/v1/tables/{id}", get(handle_tables))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .layer(axum::middleware::map_response(move |mut res: Response| {
            let checksum = checksum.clone();
            async move {
                res.headers_mut().insert(CHECKSUM_HEADER, checksum);
                res
            }
        }))
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

async fn index() -> Html<&'static str> {
    Html(include_str!("index.html"))
}

async fn health(State(state): State<AppState>) -> Response {
    envelope(
        StatusCode::OK,
        serde_json::json!({
            "status": "ok",
            "version": env!("CARGO_PKG_VERSION"),
            "knowledge_base_checksum": state.kb.checksum(),
            "knowledge_base_revision": state.kb.revision(),
        }),
    )
}

async fn handle_recommend(
    State(state): State<AppState>,
    body: String,
) -> Result<Response, ApiError> {
    let request = DesignRequest::from_json(&body)?;
    let report = recommend(&state.kb, &request)?;
    Ok(envelope(StatusCode::OK, report))
}

fn resolve(state: &AppState, dataset: Option<&DatasetRef>) -> Result<Arc<Dataset>, ApiError> {
    match dataset {
        None => Err(ApiError::bad_request(
            Some("dataset".to_string()),
            "dataset: required (inline or id)",
        )),
        Some(DatasetRef::Inline(inline)) => inline
            .load()
            .map(Arc::new)
            .map_err(|e| data_error("dataset.inline", e)),
        Some(DatasetRef::Id(id)) => state
            .cache
            .lock()
            .expect("cache lock")
            .get(id)
            .ok_or_else(|| ApiError::not_found(format!("unknown dataset `{id}`"))),
    }
}

fn svg_response(rendered: Rendered) -> Response {
    (
        StatusCode::OK,
        [
            (header::CONTENT_TYPE, "image/svg+xml"),
            (header::HeaderName::from_static(SCHEMA_HEADER), API_SCHEMA),
        ],
        Body::from(rendered.document.into_string()),
    )
        .into_response()
}

async fn handle_render_map(
    State(state): State<AppState>,
    body: String,
) -> Result<Response, ApiError> {
    let request = RenderRequest::from_json(&body)?;
    let dataset = resolve(&state, request.dataset.as_ref())?;
    Ok(svg_response(request.render_map(&state.kb, &dataset)?))
}

async fn handle_render_legend(
    State(state): State<AppState>,
    body: String,
) -> Result<Response, ApiError> {
    let request = RenderRequest::from_json(&body)?;
    let dataset = resolve(&state, request.dataset.as_ref())?;
    Ok(svg_response(request.render_legend(&state.kb, &dataset)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BinRequest {
    dataset: DatasetRef,
    attribute: String,
    binning: BinningScheme,
    #[serde(default)]
    coefficient_of_variation: Option<CvSpec>,
}

async fn handle_bin(State(state): State<AppState>, body: String) -> Result<Response, ApiError> {
    let request: BinRequest = parse_json(&body)?;
    let mut dataset = (*resolve(&state, Some(&request.dataset))?).clone();
    if let Some(cv) = &request.coefficient_of_variation {
        dataset = dataset
            .with_coefficient_of_variation(&cv.name, &cv.mean, &cv.sd)
            .map_err(|e| data_error("coefficient_of_variation", e))?;
    }
    let binned = dataset
        .classify(&request.attribute, &request.binning)
        .map_err(|e| data_error("binning", e))?;
    Ok(envelope(StatusCode::OK, binned))
}

#[derive(Serialize)]
struct Uploaded<'a> {
    id: String,
    features: usize,
    implantation: bivmap::knowledge_base::Implantation,
    attributes: Vec<&'a str>,
}

async fn handle_upload(State(state): State<AppState>, body: String) -> Result<Response, ApiError> {
    let inline: InlineDataset = parse_json(&body)?;
    let dataset = inline.load().map_err(|e| data_error("body", e))?;
    let canonical = dataset.to_geojson();
    let id = hex::encode(Sha256::digest(canonical.as_bytes()));
    let dataset = Arc::new(dataset);
    let stored = state.cache.lock().expect("cache lock").insert(
        id.clone(),
        Arc::clone(&dataset),
        canonical.len(),
    );
    if !stored {
        return Err(ApiError {
            status: StatusCode::PAYLOAD_TOO_LARGE,
            field: None,
            message: "dataset exceeds the cache capacity".to_string(),
        });
    }
    Ok(envelope(
        StatusCode::OK,
        Uploaded {
            id,
            features: dataset.len(),
            implantation: dataset.implantation,
            attributes: dataset.attribute_names(),
        },
    ))
}

async fn handle_tables(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let table: TableId = id
        .parse()
        .map_err(|_| ApiError::not_found(format!("unknown table `{id}`")))?;
    Ok(envelope(StatusCode::OK, state.kb.table(table)))
}
