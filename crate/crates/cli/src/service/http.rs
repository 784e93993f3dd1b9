//! JSON-over-HTTP front end for [`SessionManager`].

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::session::{ServiceError, SessionManager};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::Validation(_) | ServiceError::Usage(_) => StatusCode::BAD_REQUEST,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
            ServiceError::Storage(_) | ServiceError::Replay { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            log::error!("{self}");
        }
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Debug, Deserialize)]
struct CreateRequest {
    mode: String,
    m: Option<i64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct ResponseRequest {
    material_id: String,
    understood: bool,
}

type Shared = Arc<SessionManager>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ServiceError::Validation(e.body_text()))
}

async fn create_session(
    State(mgr): State<Shared>,
    payload: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<impl IntoResponse, ServiceError> {
    let req = body(payload)?;
    let desc = mgr.create_session(&req.mode, req.m, req.seed)?;
    Ok((StatusCode::CREATED, Json(desc)))
}

async fn next(State(mgr): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(mgr.get_next(&id)?))
}

async fn respond(
    State(mgr): State<Shared>,
    Path(id): Path<String>,
    payload: Result<Json<ResponseRequest>, JsonRejection>,
) -> Result<impl IntoResponse, ServiceError> {
    let req = body(payload)?;
    Ok(Json(mgr.post_response(&id, &req.material_id, req.understood)?))
}

async fn state(State(mgr): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(mgr.get_state(&id)?))
}

async fn graph_stats(State(mgr): State<Shared>) -> impl IntoResponse {
    Json(mgr.engine().graph().stats())
}

pub fn router(manager: Arc<SessionManager>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/next", get(next))
        .route("/sessions/{id}/response", post(respond))
        .route("/sessions/{id}/state", get(state))
        .route("/graph/stats", get(graph_stats))
        .with_state(manager)
}
