use std::collections::BTreeSet;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Path, Request, State};
use axum::http::header::CONTENT_TYPE;
use axum::http::request::Parts;
use axum::response::{IntoResponse, Response};
use axum::Json;
use mariomix_core::playstyle::{Aggregates, CHARACTERIZE_MAX_TICKS};
use mariomix_core::{
    auto_assign, extract_clip, run_mixed, segment_boundaries, Assignment, AssignmentFile, Clip, Level,
    PolicyDataset, Replay, Resolution, Segmentation,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::state::{AppState, ClipKey};

/// `Json` whose rejections use the `{code, message}` error body.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| ApiJson(v))
            .map_err(|e: JsonRejection| ApiError::bad_request(e.body_text()))
    }
}

pub struct ApiQuery<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for ApiQuery<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        axum::extract::Query::<T>::from_request_parts(parts, state)
            .await
            .map(|q| ApiQuery(q.0))
            .map_err(|e: QueryRejection| ApiError::bad_request(e.body_text()))
    }
}

fn dataset(state: &AppState) -> Result<&PolicyDataset, ApiError> {
    state.dataset.as_deref().ok_or_else(ApiError::dataset_not_loaded)
}

fn level<'a>(state: &'a AppState, id: &str) -> Result<&'a Level, ApiError> {
    state
        .level(id)
        .ok_or_else(|| ApiError::not_found(format!("no level `{id}`")))
}

fn json_body(text: impl Into<axum::body::Body>) -> Response {
    ([(CONTENT_TYPE, "application/json")], text.into()).into_response()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level_id: String,
    pub width: i32,
    pub height: i32,
    /// The level's rows in the ASCII tile format.
    pub thumbnail_tile_summary: Vec<String>,
}

fn ascii_rows(level: &Level) -> Vec<String> {
    level.to_ascii().lines().map(String::from).collect()
}

pub async fn list_levels(State(state): State<AppState>) -> Json<Vec<LevelSummary>> {
    Json(
        state
            .levels
            .iter()
            .map(|l| LevelSummary {
                level_id: l.id.clone(),
                width: l.width,
                height: l.height,
                thumbnail_tile_summary: ascii_rows(l),
            })
            .collect(),
    )
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PolicySummary {
    pub display_name: String,
    pub aggregates: Aggregates,
}

pub async fn list_policies(State(state): State<AppState>) -> Result<Json<Vec<PolicySummary>>, ApiError> {
    Ok(Json(
        dataset(&state)?
            .entries
            .iter()
            .map(|e| PolicySummary {
                display_name: e.display_name.clone(),
                aggregates: e.metrics.aggregates,
            })
            .collect(),
    ))
}

#[derive(Debug, Deserialize)]
pub struct ResolutionQuery {
    pub resolution: Resolution,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentsResponse {
    #[serde(flatten)]
    pub segmentation: Segmentation,
    /// Per segment, the ASCII rows of its columns.
    pub thumbnails: Vec<Vec<String>>,
}

pub async fn get_segments(
    State(state): State<AppState>,
    Path(level_id): Path<String>,
    ApiQuery(q): ApiQuery<ResolutionQuery>,
) -> Result<Json<SegmentsResponse>, ApiError> {
    let level = level(&state, &level_id)?;
    let segmentation = segment_boundaries(level, q.resolution)?;
    let rows = ascii_rows(level);
    let thumbnails = segmentation
        .boundaries
        .iter()
        .map(|&(a, b)| rows.iter().map(|r| r.chars().skip(a).take(b - a).collect()).collect())
        .collect();
    Ok(Json(SegmentsResponse {
        segmentation,
        thumbnails,
    }))
}

#[derive(Debug, Deserialize)]
pub struct ClipQuery {
    pub level_id: String,
    pub resolution: Resolution,
    pub segment: usize,
    pub policy: String,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Serialize)]
struct ClipResponse<'a> {
    resolution: Resolution,
    #[serde(flatten)]
    clip: &'a Clip,
}

pub async fn get_clip(
    State(state): State<AppState>,
    ApiQuery(q): ApiQuery<ClipQuery>,
) -> Result<Response, ApiError> {
    let key = ClipKey {
        level_id: q.level_id.clone(),
        resolution: q.resolution,
        segment: q.segment,
        policy: q.policy.clone(),
        seed: q.seed,
    };
    if let Some(hit) = state.clips.lock().unwrap().get(&key).cloned() {
        return Ok(json_body(hit.to_string()));
    }
    let worker = state.clone();
    let body: String = tokio::task::spawn_blocking(move || -> Result<String, ApiError> {
        let ds = dataset(&worker)?;
        let level = level(&worker, &q.level_id)?;
        if ds.get(&q.policy).is_none() {
            return Err(ApiError::new(
                axum::http::StatusCode::NOT_FOUND,
                "UnknownPolicyName",
                format!("no policy named `{}`", q.policy),
            ));
        }
        let seg = segment_boundaries(level, q.resolution)?;
        let assignment = Assignment::uniform(seg.clone(), &q.policy);
        let replay = run_mixed(level, &assignment, ds, q.seed, CHARACTERIZE_MAX_TICKS)?;
        let mut clip = extract_clip(&replay, &seg, q.segment)?;
        clip.policy = Some(q.policy.clone());
        Ok(serde_json::to_string(&ClipResponse {
            resolution: q.resolution,
            clip: &clip,
        })
        .expect("clip serializes"))
    })
    .await
    .expect("clip task does not panic")?;
    let body: std::sync::Arc<str> = body.into();
    state.clips.lock().unwrap().insert(key, body.clone());
    Ok(json_body(body.to_string()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssignmentResponse {
    pub level_id: String,
    pub resolution: Resolution,
    pub slots: Vec<Option<String>>,
    pub segmentation: Segmentation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl AssignmentResponse {
    fn new(a: &Assignment, seed: Option<u64>) -> AssignmentResponse {
        AssignmentResponse {
            level_id: a.segmentation.level_id.clone(),
            resolution: a.segmentation.resolution,
            slots: a.slots.clone(),
            segmentation: a.segmentation.clone(),
            seed,
        }
    }
}

fn resolve_assignment(state: &AppState, file: AssignmentFile) -> Result<(&Level, Assignment), ApiError> {
    let ds = dataset(state)?;
    let level = level(state, &file.level_id)?;
    let assignment = file.into_assignment(level)?;
    assignment.check_names(ds)?;
    Ok((level, assignment))
}

pub async fn put_assignment(
    State(state): State<AppState>,
    ApiJson(file): ApiJson<AssignmentFile>,
) -> Result<Json<AssignmentResponse>, ApiError> {
    let (level, assignment) = resolve_assignment(&state, file)?;
    let out = AssignmentResponse::new(&assignment, None);
    state.assignments.lock().unwrap().insert(level.id.clone(), assignment);
    Ok(Json(out))
}

pub async fn get_assignment(
    State(state): State<AppState>,
    Path(level_id): Path<String>,
) -> Result<Json<AssignmentResponse>, ApiError> {
    level(&state, &level_id)?;
    let saved = state.assignments.lock().unwrap().get(&level_id).cloned();
    saved
        .map(|a| Json(AssignmentResponse::new(&a, None)))
        .ok_or_else(|| ApiError::not_found(format!("no assignment saved for `{level_id}`")))
}

#[derive(Debug, Deserialize)]
pub struct AutoAssignRequest {
    #[serde(flatten)]
    pub assignment: AssignmentFile,
    #[serde(default)]
    pub seed: Option<u64>,
}

pub async fn post_auto_assign(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<AutoAssignRequest>,
) -> Result<Json<AssignmentResponse>, ApiError> {
    let (_, assignment) = resolve_assignment(&state, req.assignment)?;
    let seed = req.seed.unwrap_or_else(|| rand::rng().random());
    let filled = auto_assign(&assignment, dataset(&state)?, &mut ChaCha8Rng::seed_from_u64(seed))?;
    Ok(Json(AssignmentResponse::new(&filled, Some(seed))))
}

#[derive(Debug, Deserialize)]
pub struct ReviewRequest {
    #[serde(flatten)]
    pub assignment: AssignmentFile,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub max_ticks: Option<u32>,
}

#[derive(Serialize)]
struct ReviewResponse<'a> {
    resolution: Resolution,
    slots: &'a [Option<String>],
    #[serde(flatten)]
    replay: &'a Replay,
    checksum: String,
}

pub async fn post_review(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<ReviewRequest>,
) -> Result<Response, ApiError> {
    let max_ticks = req.max_ticks.unwrap_or(CHARACTERIZE_MAX_TICKS);
    if max_ticks == 0 {
        return Err(ApiError::bad_request("max_ticks must be positive"));
    }
    let body = tokio::task::spawn_blocking(move || -> Result<String, ApiError> {
        let (level, assignment) = resolve_assignment(&state, req.assignment)?;
        let replay = run_mixed(level, &assignment, dataset(&state)?, req.seed, max_ticks)?;
        Ok(serde_json::to_string(&ReviewResponse {
            resolution: assignment.segmentation.resolution,
            slots: &assignment.slots,
            checksum: format!("{:016x}", replay.checksum()),
            replay: &replay,
        })
        .expect("replay serializes"))
    })
    .await
    .expect("review task does not panic")?;
    Ok(json_body(body))
}

#[derive(Debug, Deserialize)]
pub struct MoreRequest {
    pub selected: String,
    #[serde(default)]
    pub shown: BTreeSet<String>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MoreResponse {
    pub display_name: String,
}

pub async fn post_search_more(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<MoreRequest>,
) -> Result<Json<MoreResponse>, ApiError> {
    let ds = dataset(&state)?;
    let selected = ds.get(&req.selected).ok_or_else(|| {
        ApiError::new(
            axum::http::StatusCode::NOT_FOUND,
            "UnknownPolicyName",
            format!("no policy named `{}`", req.selected),
        )
    })?;
    let mut exclude = req.shown;
    exclude.insert(req.selected.clone());
    let name = ds.nearest(&selected.metrics, 1, &exclude)?.remove(0);
    Ok(Json(MoreResponse { display_name: name }))
}
