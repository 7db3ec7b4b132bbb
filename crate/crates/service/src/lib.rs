//! HTTP + websocket API for browsing, mixing and searching playstyles.
//!
//! Every route lives under `/api/v1`. Errors are JSON `{code, message}`.

use std::future::Future;
use std::path::Path;

use axum::routing::{get, post, put};
use axum::Router;
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub mod demo;
pub mod error;
pub mod routes;
mod state;

pub use error::{ApiError, ErrorBody};
pub use state::{AppState, ServiceConfig, DEFAULT_IDLE_TIMEOUT};

pub fn api_router(state: AppState) -> Router {
    let api = Router::new()
        .route("/levels", get(routes::list_levels))
        .route("/levels/{level_id}/segments", get(routes::get_segments))
        .route("/policies", get(routes::list_policies))
        .route("/clip", get(routes::get_clip))
        .route("/assignment", put(routes::put_assignment))
        .route("/assignment/{level_id}", get(routes::get_assignment))
        .route("/assignment/auto", post(routes::post_auto_assign))
        .route("/review", post(routes::post_review))
        .route("/search/more", post(routes::post_search_more))
        .route("/demo", get(demo::demo_socket));
    Router::new()
        .nest("/api/v1", api)
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// The API plus, optionally, static UI assets served from `static_dir`.
pub fn app(state: AppState, static_dir: Option<&Path>) -> Router {
    let router = api_router(state);
    match static_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router,
    }
}

/// Serves `router` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    router: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router).with_graceful_shutdown(shutdown).await
}
