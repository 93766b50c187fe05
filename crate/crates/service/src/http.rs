use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use pixdrive_core::ingest::{InputFormat, ParseOptions};
use serde_json::json;

use crate::error::ServiceError;
use crate::service::{TileRequest, TileService};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

pub fn router(service: Arc<TileService>) -> Router {
    let limit = service.config().max_upload_bytes;
    Router::new()
        .route("/tile/{dataset}/{z}/{x}/{y}", get(tile))
        .route("/datasets", get(list_datasets).post(register))
        .route("/metrics", get(metrics))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(service)
}

async fn tile(
    State(svc): State<Arc<TileService>>,
    Path((dataset, z, x, y)): Path<(String, String, String, String)>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Response, ServiceError> {
    let y = y.strip_suffix(".png").ok_or_else(|| ServiceError::BadRequest(format!("expected {{y}}.png, got `{y}`")))?;
    let req = TileRequest::parse(&dataset, &z, &x, y, &query)?;
    let png = svc.tile_png(&req).await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn list_datasets(State(svc): State<Arc<TileService>>) -> Response {
    Json(svc.datasets()).into_response()
}

async fn metrics(State(svc): State<Arc<TileService>>) -> Response {
    Json(svc.metrics()).into_response()
}

async fn register(State(svc): State<Arc<TileService>>, mut form: Multipart) -> Result<Response, ServiceError> {
    let bad = |m: String| ServiceError::BadRequest(m);
    let (mut name, mut format, mut file, mut header) = (None, None, None, false);
    while let Some(field) = form.next_field().await.map_err(|e| bad(e.to_string()))? {
        match field.name().unwrap_or("") {
            "name" => name = Some(field.text().await.map_err(|e| bad(e.to_string()))?),
            "format" => {
                let f = field.text().await.map_err(|e| bad(e.to_string()))?;
                format = Some(f.parse::<InputFormat>().map_err(bad)?);
            }
            "header" | "csv_header" => header = matches!(field.text().await.as_deref(), Ok("true" | "1" | "on")),
            "file" => file = Some(field.bytes().await.map_err(|e| bad(e.to_string()))?),
            other => return Err(bad(format!("unexpected form field `{other}`"))),
        }
    }
    let name = name.ok_or_else(|| bad("missing field `name`".into()))?;
    let format = format.ok_or_else(|| bad("missing field `format`".into()))?;
    let file = file.ok_or_else(|| bad("missing field `file`".into()))?;
    let handle =
        tokio::task::spawn_blocking(move || svc.register(&name, format, &file, ParseOptions { csv_header: header }))
            .await
            .map_err(|e| ServiceError::Internal(e.to_string()))??;
    Ok((StatusCode::CREATED, Json(handle)).into_response())
}

/// Serves `router(service)` until Ctrl-C, then drains the worker pool.
pub async fn serve(service: Arc<TileService>) -> std::io::Result<()> {
    let addr = service.config().addr();
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "tile service listening");
    axum::serve(listener, router(Arc::clone(&service)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    let svc = Arc::clone(&service);
    tokio::task::spawn_blocking(move || svc.shutdown()).await.ok();
    Ok(())
}
