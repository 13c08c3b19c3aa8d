//! HTTP adapter over `Service`. Handlers only move bodies in and out; every
//! response is the JSON of a `Service` return value or of its error.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::service::{CreateSession, Service, ServiceError, SubmitStep};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub retriable: bool,
}

pub fn status_of(e: &ServiceError) -> StatusCode {
    match e {
        ServiceError::UnknownSession(_) | ServiceError::UnknownTheorem(_) => StatusCode::NOT_FOUND,
        ServiceError::Completed(_) => StatusCode::CONFLICT,
        ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
        ServiceError::Backend(_) => StatusCode::BAD_GATEWAY,
        ServiceError::Journal(_) | ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

struct ApiError(ServiceError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.0.to_string(),
            retriable: self.0.retriable(),
        };
        (status_of(&self.0), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Runs a blocking service call off the async executor.
async fn blocking<T, F>(svc: Arc<Service>, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Service) -> Result<T, ServiceError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&svc))
        .await
        .map_err(|e| ApiError(ServiceError::Internal(e.to_string())))?
        .map(Json)
        .map_err(ApiError)
}

#[derive(Debug, Default, Deserialize)]
struct ViewQuery {
    #[serde(default)]
    instructor: bool,
}

pub fn router(svc: Arc<Service>) -> Router {
    Router::new()
        .route("/api/theorems", get(theorems))
        .route("/api/worlds", get(worlds))
        .route("/api/sessions", post(create))
        .route("/api/sessions/{id}", get(view))
        .route("/api/sessions/{id}/steps", post(step))
        .route("/api/sessions/{id}/hint", post(hint))
        .with_state(svc)
}

async fn theorems(State(svc): State<Arc<Service>>) -> impl IntoResponse {
    Json(svc.theorems())
}

async fn worlds(State(svc): State<Arc<Service>>) -> impl IntoResponse {
    Json(svc.worlds())
}

async fn create(State(svc): State<Arc<Service>>, Json(req): Json<CreateSession>) -> Response {
    match blocking(svc, move |s| s.create_session(&req)).await {
        Ok(body) => (StatusCode::CREATED, body).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn view(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    Query(q): Query<ViewQuery>,
) -> ApiResult<crate::session::SessionView> {
    blocking(svc, move |s| s.view(&id, q.instructor)).await
}

async fn step(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    Json(req): Json<SubmitStep>,
) -> ApiResult<crate::session::StepResponse> {
    blocking(svc, move |s| s.submit_step(&id, &req)).await
}

async fn hint(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
) -> ApiResult<crate::session::HintResponse> {
    blocking(svc, move |s| s.request_hint(&id)).await
}

pub async fn serve(svc: Arc<Service>, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(svc)).await
}
