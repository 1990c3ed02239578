//! Read-only routes available to every visitor.

use axum::body::Body;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use acoa_core::{layout, AboutContent, Artwork, MediaId, TimelineLayout, WorkSummary};

use crate::error::{ApiError, ApiResult};
use crate::range::{self, RangeRequest};
use crate::AppState;

pub const PLAYBACK_POLICY_HEADER: &str = "x-playback-policy";

/// A stored work together with its computed timeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkDetail {
    #[serde(flatten)]
    pub work: Artwork,
    pub layout: TimelineLayout,
}

impl WorkDetail {
    pub fn of(work: Artwork) -> ApiResult<Self> {
        let layout = layout(&work.phases)?;
        Ok(WorkDetail { work, layout })
    }
}

pub async fn list_works(State(state): State<AppState>) -> Json<Vec<WorkSummary>> {
    Json(state.repo.list_works())
}

pub async fn get_work(
    State(state): State<AppState>,
    Path(slug): Path<String>,
) -> ApiResult<Json<WorkDetail>> {
    let work = state.repo.get_work(&slug)?;
    Ok(Json(WorkDetail::of(work)?))
}

pub async fn get_about(State(state): State<AppState>) -> ApiResult<Json<AboutContent>> {
    Ok(Json(state.repo.get_about()?))
}

pub async fn get_media(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let id = MediaId(id);
    if !id.is_well_formed() {
        return Err(ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("media {id} not found")));
    }
    let (asset, bytes) = state.repo.get_media(&id)?;
    let len = bytes.len() as u64;

    let mut out = HeaderMap::new();
    let content_type = HeaderValue::from_str(&asset.content_type)
        .unwrap_or_else(|_| HeaderValue::from_static("application/octet-stream"));
    out.insert(header::CONTENT_TYPE, content_type);
    out.insert(header::ACCEPT_RANGES, HeaderValue::from_static("bytes"));
    out.insert(
        PLAYBACK_POLICY_HEADER,
        HeaderValue::from_static(asset.playback_policy.as_str()),
    );
    if let Ok(etag) = HeaderValue::from_str(&format!("\"{}\"", asset.id)) {
        out.insert(header::ETAG, etag);
    }
    out.insert(
        header::CACHE_CONTROL,
        HeaderValue::from_static("public, max-age=31536000, immutable"),
    );

    let range_header = headers.get(header::RANGE).and_then(|v| v.to_str().ok());
    let response = match range::parse(range_header, len) {
        RangeRequest::Full => (StatusCode::OK, out, Body::from(bytes)).into_response(),
        RangeRequest::Partial(r) => {
            let (start, end) = (*r.start(), *r.end());
            let content_range = format!("bytes {start}-{end}/{len}");
            out.insert(
                header::CONTENT_RANGE,
                HeaderValue::from_str(&content_range).expect("ascii header"),
            );
            let slice = bytes[start as usize..=end as usize].to_vec();
            (StatusCode::PARTIAL_CONTENT, out, Body::from(slice)).into_response()
        }
        RangeRequest::Unsatisfiable => {
            out.insert(
                header::CONTENT_RANGE,
                HeaderValue::from_str(&format!("bytes */{len}")).expect("ascii header"),
            );
            let err = ApiError::new(
                StatusCode::RANGE_NOT_SATISFIABLE,
                "invalid_range",
                format!("range {:?} cannot be served from {len} bytes", range_header.unwrap_or("")),
            );
            let mut resp = err.into_response();
            resp.headers_mut().extend(out);
            resp.headers_mut()
                .insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
            resp
        }
    };
    Ok(response)
}
