//! Axum router for the `/api/v1` surface.

use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, JsonRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, FromRequest, Path, Query, Request, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use tokio::net::TcpListener;
use uisuggest_core::{ReportId, SessionId};

use crate::api::{
    report_summary, report_view, session_view, suggestions_view, ChoiceValue, FeedbackRequest,
    RefineRequest, ReportList, ReportRequest, ReportResponse,
};
use crate::service::{ReportChoice, Service};
use crate::store::ReportFilter;
use crate::ServiceError;

const DEFAULT_PAGE: usize = 50;
const MAX_PAGE: usize = 500;

/// JSON body extractor whose rejections use the API error format.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ServiceError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(JsonRejection::MissingJsonContentType(e)) => {
                Err(ServiceError::UnsupportedMedia(e.body_text()))
            }
            Err(JsonRejection::BytesRejection(e)) => Err(bytes_rejection(e, 0)),
            Err(e) => Err(ServiceError::Unprocessable(e.body_text())),
        }
    }
}

fn bytes_rejection(e: BytesRejection, limit: usize) -> ServiceError {
    if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
        ServiceError::PayloadTooLarge { size: limit + 1, limit }
    } else {
        ServiceError::Unprocessable(e.body_text())
    }
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ServiceError> {
    q.map(|Query(v)| v)
        .map_err(|e| ServiceError::Unprocessable(e.body_text()))
}

pub fn router(service: Arc<Service>) -> Router {
    let upload_limit = service.config().max_upload_bytes;
    Router::new()
        .route(
            "/api/v1/sessions",
            post(create_session).layer(DefaultBodyLimit::max(upload_limit)),
        )
        .route("/api/v1/sessions/{id}", get(get_session))
        .route("/api/v1/sessions/{id}/feedback", post(submit_feedback))
        .route("/api/v1/sessions/{id}/suggestions", get(get_suggestions))
        .route("/api/v1/sessions/{id}/refine", post(refine))
        .route("/api/v1/sessions/{id}/report", post(submit_report))
        .route("/api/v1/reports", get(list_reports))
        .route("/api/v1/reports/{id}", get(get_report))
        .route("/api/v1/blobs/{hash}", get(get_blob))
        .route("/api/v1/bundle/manifest.json", get(bundle_manifest))
        .route("/api/v1/bundle/images/{task}/{file}", get(bundle_image))
        .fallback(|| async { ServiceError::NotFound("route".into()) })
        .with_state(service)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    service: Arc<Service>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(shutdown)
        .await
}

#[derive(Deserialize)]
struct CreateQuery {
    app_tag: Option<String>,
}

async fn create_session(
    State(svc): State<Arc<Service>>,
    q: Result<Query<CreateQuery>, QueryRejection>,
    headers: HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> Result<Response, ServiceError> {
    let q = query(q)?;
    let limit = svc.config().max_upload_bytes;
    let body = body.map_err(|e| bytes_rejection(e, limit))?;
    if let Some(ct) = headers.get(header::CONTENT_TYPE) {
        let ct = ct.to_str().unwrap_or("").to_ascii_lowercase();
        if !(ct.starts_with("image/") || ct.starts_with("application/octet-stream")) {
            return Err(ServiceError::UnsupportedMedia(format!(
                "expected an image body, got {ct}"
            )));
        }
    }
    let snap = svc.create_session(&body, q.app_tag).await?;
    Ok((StatusCode::CREATED, Json(session_view(&snap))).into_response())
}

async fn get_session(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    let snap = svc.snapshot(&SessionId(id))?;
    Ok(Json(session_view(&snap)).into_response())
}

async fn submit_feedback(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<FeedbackRequest>,
) -> Result<Response, ServiceError> {
    let job = svc
        .submit_feedback(&SessionId(id), req.issue_text, req.mark)
        .await?;
    Ok((StatusCode::ACCEPTED, Json(job)).into_response())
}

async fn get_suggestions(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    let snap = svc.snapshot(&SessionId(id))?;
    Ok(Json(suggestions_view(&snap)).into_response())
}

async fn refine(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<RefineRequest>,
) -> Result<Response, ServiceError> {
    let job = svc
        .refine(&SessionId(id), req.suggestion_index, req.edit_text)
        .await?;
    Ok((StatusCode::ACCEPTED, Json(job)).into_response())
}

async fn submit_report(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<ReportRequest>,
) -> Result<Response, ServiceError> {
    let choice = match req.choice {
        ChoiceValue::Index(i) => ReportChoice::Suggestion(i),
        ChoiceValue::Keyword(k) if k == "reject_all" => ReportChoice::RejectAll,
        ChoiceValue::Keyword(k) => {
            return Err(ServiceError::Unprocessable(format!(
                "choice must be a suggestion index or \"reject_all\", got {k:?}"
            )))
        }
    };
    let id = SessionId(id);
    let out = svc.submit_report(&id, choice, req.comment).await?;
    let status = if out.report_id.is_some() {
        StatusCode::CREATED
    } else {
        StatusCode::OK
    };
    Ok((
        status,
        Json(ReportResponse {
            session_id: id,
            state: out.state,
            report_id: out.report_id,
        }),
    )
        .into_response())
}

#[derive(Deserialize)]
struct ListQuery {
    app_tag: Option<String>,
    since: Option<DateTime<Utc>>,
    limit: Option<usize>,
    offset: Option<usize>,
}

async fn list_reports(
    State(svc): State<Arc<Service>>,
    q: Result<Query<ListQuery>, QueryRejection>,
) -> Result<Response, ServiceError> {
    let q = query(q)?;
    let all = svc.list_reports(&ReportFilter {
        app_tag: q.app_tag,
        since: q.since,
    });
    let limit = q.limit.unwrap_or(DEFAULT_PAGE).min(MAX_PAGE);
    let reports = all
        .iter()
        .skip(q.offset.unwrap_or(0))
        .take(limit)
        .map(report_summary)
        .collect();
    Ok(Json(ReportList {
        total: all.len(),
        reports,
    })
    .into_response())
}

async fn get_report(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    let svc2 = svc.clone();
    let (report, entry) = tokio::task::spawn_blocking(move || svc2.get_report(&ReportId(id)))
        .await
        .map_err(ServiceError::internal)??;
    Ok(Json(report_view(&report, &entry)).into_response())
}

fn etag(hash: &str) -> String {
    format!("\"{hash}\"")
}

async fn get_blob(
    State(svc): State<Arc<Service>>,
    Path(hash): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ServiceError> {
    let tag = etag(&hash);
    let cache = [
        (header::ETAG, tag.clone()),
        (
            header::CACHE_CONTROL,
            "public, max-age=31536000, immutable".to_string(),
        ),
    ];
    let bytes = tokio::task::spawn_blocking({
        let svc = svc.clone();
        let hash = hash.clone();
        move || svc.blob(&hash)
    })
    .await
    .map_err(ServiceError::internal)?
    .ok_or_else(|| ServiceError::NotFound(format!("blob {hash}")))?;
    if headers
        .get(header::IF_NONE_MATCH)
        .is_some_and(|v| v.as_bytes() == tag.as_bytes())
    {
        return Ok((StatusCode::NOT_MODIFIED, cache).into_response());
    }
    Ok((
        cache,
        [(header::CONTENT_TYPE, HeaderValue::from_static("image/png"))],
        bytes,
    )
        .into_response())
}

fn bundle_dir(svc: &Service) -> Result<PathBuf, ServiceError> {
    svc.config()
        .bundle_dir
        .clone()
        .ok_or_else(|| ServiceError::NotFound("annotation bundle".into()))
}

async fn read_file(path: PathBuf) -> Result<Vec<u8>, ServiceError> {
    match tokio::fs::read(&path).await {
        Ok(b) => Ok(b),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(ServiceError::NotFound(display_tail(&path)))
        }
        Err(e) => Err(ServiceError::internal(e)),
    }
}

fn display_tail(path: &FsPath) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn safe_component(s: &str) -> bool {
    !s.is_empty() && !s.starts_with('.') && !s.contains(['/', '\\'])
}

async fn bundle_manifest(State(svc): State<Arc<Service>>) -> Result<Response, ServiceError> {
    let bytes = read_file(bundle_dir(&svc)?.join("manifest.json")).await?;
    Ok((
        [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))],
        bytes,
    )
        .into_response())
}

async fn bundle_image(
    State(svc): State<Arc<Service>>,
    Path((task, file)): Path<(String, String)>,
) -> Result<Response, ServiceError> {
    if !safe_component(&task) || !safe_component(&file) || !file.ends_with(".png") {
        return Err(ServiceError::NotFound(format!("bundle image {task}/{file}")));
    }
    let bytes = read_file(bundle_dir(&svc)?.join("images").join(task).join(file)).await?;
    Ok((
        [(header::CONTENT_TYPE, HeaderValue::from_static("image/png"))],
        bytes,
    )
        .into_response())
}
