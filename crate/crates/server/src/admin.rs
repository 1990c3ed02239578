//! Authenticated editorial routes under `/api/admin`.

use axum::extract::{FromRequest, FromRequestParts, Multipart, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::IntoResponse;
use axum::Json;
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use acoa_core::model::timestamp;
use acoa_core::{AboutContent, Artwork, Error, MediaAsset, MediaKind, NewMedia};

use crate::error::{ApiError, ApiResult};
use crate::public::WorkDetail;
use crate::AppState;

/// The username behind a valid bearer token.
#[derive(Debug, Clone)]
pub struct Admin(pub String);

fn bearer_token(headers: &HeaderMap) -> Option<&str> {
    let value = headers.get(header::AUTHORIZATION)?.to_str().ok()?;
    let (scheme, token) = value.split_once(' ')?;
    let token = token.trim();
    (scheme.eq_ignore_ascii_case("bearer") && !token.is_empty()).then_some(token)
}

impl FromRequestParts<AppState> for Admin {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let token = bearer_token(&parts.headers).ok_or_else(ApiError::unauthorized)?;
        state
            .auth
            .authorize(token)
            .map(Admin)
            .map_err(|_| ApiError::unauthorized())
    }
}

/// `Json<T>` whose rejections use the service's error body.
pub struct Payload<T>(pub T);

impl<T: DeserializeOwned, S: Send + Sync> FromRequest<S> for Payload<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let Json(value) = Json::<T>::from_request(req, state).await?;
        Ok(Payload(value))
    }
}

#[derive(Debug, Deserialize)]
pub struct LoginRequest {
    pub username: String,
    pub password: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LoginResponse {
    pub token: String,
    pub username: String,
    #[serde(with = "timestamp")]
    pub expires_at: DateTime<Utc>,
}

pub async fn login(
    State(state): State<AppState>,
    Payload(req): Payload<LoginRequest>,
) -> ApiResult<Json<LoginResponse>> {
    let auth = state.auth.clone();
    // Password hashing is deliberately slow; keep it off the async workers.
    let session = tokio::task::spawn_blocking(move || auth.login(&req.username, &req.password))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(LoginResponse {
        token: session.token,
        username: session.username,
        expires_at: session.expires_at,
    }))
}

pub async fn logout(_: Admin, State(state): State<AppState>, headers: HeaderMap) -> StatusCode {
    if let Some(token) = bearer_token(&headers) {
        state.auth.logout(token);
    }
    StatusCode::NO_CONTENT
}

#[derive(Debug, Serialize)]
pub struct WhoAmI {
    pub username: String,
}

pub async fn session(Admin(username): Admin) -> Json<WhoAmI> {
    Json(WhoAmI { username })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub slug: String,
}

pub async fn create_work(
    Admin(user): Admin,
    State(state): State<AppState>,
    Payload(work): Payload<Artwork>,
) -> ApiResult<impl IntoResponse> {
    let slug = state.repo.create_work(work)?;
    tracing::info!(%user, %slug, "work created");
    Ok((StatusCode::CREATED, Json(Created { slug })))
}

pub async fn update_work(
    Admin(user): Admin,
    State(state): State<AppState>,
    Path(slug): Path<String>,
    Payload(work): Payload<Artwork>,
) -> ApiResult<Json<WorkDetail>> {
    let stored = state.repo.update_work(&slug, work)?;
    tracing::info!(%user, %slug, "work updated");
    Ok(Json(WorkDetail::of(stored)?))
}

#[derive(Debug, Deserialize)]
pub struct DeleteParams {
    confirm: Option<String>,
}

pub async fn delete_work(
    Admin(user): Admin,
    State(state): State<AppState>,
    Path(slug): Path<String>,
    Query(params): Query<DeleteParams>,
) -> ApiResult<StatusCode> {
    let confirm = params
        .confirm
        .is_some_and(|v| matches!(v.to_ascii_lowercase().as_str(), "true" | "1" | "yes"));
    if !state.repo.contains_work(&slug) {
        return Err(Error::NotFound { what: format!("work {slug}") }.into());
    }
    state.repo.delete_work(&slug, confirm)?;
    tracing::info!(%user, %slug, "work deleted");
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Deserialize)]
pub struct PhaseCount {
    pub new_count: i64,
    #[serde(default)]
    pub allow_truncation: bool,
}

pub async fn set_phase_count(
    Admin(user): Admin,
    State(state): State<AppState>,
    Path(slug): Path<String>,
    Payload(req): Payload<PhaseCount>,
) -> ApiResult<Json<WorkDetail>> {
    let work = state.repo.resize_work(&slug, req.new_count, req.allow_truncation)?;
    tracing::info!(%user, %slug, count = req.new_count, "phase count changed");
    Ok(Json(WorkDetail::of(work)?))
}

pub async fn list_media(_: Admin, State(state): State<AppState>) -> Json<Vec<MediaAsset>> {
    Json(state.repo.list_media())
}

fn unprocessable(code: &str, message: impl Into<String>) -> ApiError {
    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
}

/// Multipart fields: `file` (required), `kind`, `caption`, `credit`.
/// Without `kind` the kind is inferred from the file's content type.
pub async fn upload_media(
    Admin(user): Admin,
    State(state): State<AppState>,
    mut form: Multipart,
) -> ApiResult<impl IntoResponse> {
    let bad_form = |e: axum::extract::multipart::MultipartError| {
        ApiError::new(StatusCode::BAD_REQUEST, "malformed_multipart", e.body_text())
    };
    let mut file: Option<(Vec<u8>, String, String)> = None;
    let mut kind: Option<String> = None;
    let mut caption = None;
    let mut credit = None;
    while let Some(field) = form.next_field().await.map_err(bad_form)? {
        match field.name().unwrap_or("") {
            "file" => {
                let filename = field.file_name().unwrap_or("upload").to_owned();
                let content_type = field
                    .content_type()
                    .unwrap_or("application/octet-stream")
                    .to_owned();
                let bytes = field.bytes().await.map_err(bad_form)?;
                file = Some((bytes.to_vec(), filename, content_type));
            }
            "kind" => kind = Some(field.text().await.map_err(bad_form)?),
            "caption" => caption = Some(field.text().await.map_err(bad_form)?),
            "credit" => credit = Some(field.text().await.map_err(bad_form)?),
            _ => {}
        }
    }
    let (bytes, filename, content_type) =
        file.ok_or_else(|| unprocessable("empty_blob", "multipart field `file` is missing"))?;
    let kind = match kind.as_deref().map(str::trim).filter(|k| !k.is_empty()) {
        Some(k) => k.parse::<MediaKind>().map_err(|e| unprocessable("invalid_kind", e))?,
        None => MediaKind::from_content_type(&content_type),
    };
    let asset = state.repo.put_media(NewMedia {
        bytes: &bytes,
        filename: &filename,
        content_type: &content_type,
        kind,
        caption,
        credit,
    })?;
    tracing::info!(%user, id = %asset.id, kind = %asset.kind, "media uploaded");
    Ok((StatusCode::CREATED, Json(asset)))
}

pub async fn put_about(
    Admin(user): Admin,
    State(state): State<AppState>,
    Payload(about): Payload<AboutContent>,
) -> ApiResult<Json<AboutContent>> {
    state.repo.put_about(about)?;
    tracing::info!(%user, "about updated");
    Ok(Json(state.repo.get_about()?))
}
