//! HTTP service for artwork chronologies.
//!
//! Public profile (no authentication):
//!
//! ```text
//! GET  /api/works                       works list, sorted by title then slug
//! GET  /api/works/{slug}                full work plus its timeline layout
//! GET  /api/about                       About record
//! GET  /media/{id}                      blob; single byte ranges supported
//! ```
//!
//! Administrative profile (`Authorization: Bearer <token>`):
//!
//! ```text
//! POST   /api/admin/login               {username, password} -> {token, expires_at}
//! POST   /api/admin/logout
//! GET    /api/admin/session
//! POST   /api/admin/works               whole work in one payload -> 201 {slug}
//! PUT    /api/admin/works/{slug}
//! DELETE /api/admin/works/{slug}?confirm=true
//! PUT    /api/admin/works/{slug}/phase-count   {new_count, allow_truncation}
//! GET    /api/admin/media
//! POST   /api/admin/media               multipart: file, kind, caption, credit
//! PUT    /api/admin/about
//! ```

pub mod admin;
pub mod error;
pub mod public;
pub mod range;

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::routing::{get, post, put};
use axum::Router;
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;
use tower_http::trace::TraceLayer;

use acoa_core::{Auth, Repository};

pub use admin::{Admin, LoginResponse};
pub use error::{ApiError, ErrorBody};
pub use public::{WorkDetail, PLAYBACK_POLICY_HEADER};

/// Every admin route except login, as `(method, path template)`.
pub const PROTECTED_ROUTES: &[(&str, &str)] = &[
    ("POST", "/api/admin/logout"),
    ("GET", "/api/admin/session"),
    ("POST", "/api/admin/works"),
    ("PUT", "/api/admin/works/{slug}"),
    ("DELETE", "/api/admin/works/{slug}"),
    ("PUT", "/api/admin/works/{slug}/phase-count"),
    ("GET", "/api/admin/media"),
    ("POST", "/api/admin/media"),
    ("PUT", "/api/admin/about"),
];

pub const DEFAULT_MAX_UPLOAD_BYTES: usize = 256 * 1024 * 1024;

#[derive(Clone)]
pub struct AppState {
    pub repo: Arc<Repository>,
    pub auth: Arc<Auth>,
}

impl AppState {
    pub fn new(auth: Arc<Auth>) -> Self {
        AppState {
            repo: Arc::clone(auth.repository()),
            auth,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RouterOptions {
    /// Cross-origin UI host allowed to call the API. Same-origin when `None`.
    pub cors_origin: Option<String>,
    /// Directory of built UI assets served for every non-API path.
    pub ui_dir: Option<PathBuf>,
    pub max_upload_bytes: usize,
}

impl Default for RouterOptions {
    fn default() -> Self {
        RouterOptions {
            cors_origin: None,
            ui_dir: None,
            max_upload_bytes: DEFAULT_MAX_UPLOAD_BYTES,
        }
    }
}

pub fn router(state: AppState, options: &RouterOptions) -> Result<Router, ApiError> {
    let admin = Router::new()
        .route("/login", post(admin::login))
        .route("/logout", post(admin::logout))
        .route("/session", get(admin::session))
        .route("/works", post(admin::create_work))
        .route("/works/{slug}", put(admin::update_work).delete(admin::delete_work))
        .route("/works/{slug}/phase-count", put(admin::set_phase_count))
        .route("/media", get(admin::list_media).post(admin::upload_media))
        .route("/about", put(admin::put_about));

    let mut app = Router::new()
        .route("/api/works", get(public::list_works))
        .route("/api/works/{slug}", get(public::get_work))
        .route("/api/about", get(public::get_about))
        .route("/media/{id}", get(public::get_media))
        .nest("/api/admin", admin)
        .layer(DefaultBodyLimit::max(options.max_upload_bytes));

    app = match &options.ui_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true)),
        None => app.fallback(|| async {
            ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
        }),
    };

    if let Some(origin) = &options.cors_origin {
        let origin = HeaderValue::from_str(origin).map_err(|_| {
            ApiError::new(StatusCode::BAD_REQUEST, "invalid_config", format!("bad CORS origin {origin:?}"))
        })?;
        app = app.layer(
            CorsLayer::new()
                .allow_origin(origin)
                .allow_methods([Method::GET, Method::POST, Method::PUT, Method::DELETE])
                .allow_headers([header::AUTHORIZATION, header::CONTENT_TYPE, header::RANGE])
                .expose_headers([
                    header::CONTENT_RANGE,
                    header::ACCEPT_RANGES,
                    header::HeaderName::from_static(PLAYBACK_POLICY_HEADER),
                ]),
        );
    }

    Ok(app.with_state(state).layer(TraceLayer::new_for_http()))
}

/// Serves until `shutdown` resolves, then stops accepting connections and
/// waits for in-flight requests to finish.
pub async fn serve(
    listener: TcpListener,
    app: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
}
