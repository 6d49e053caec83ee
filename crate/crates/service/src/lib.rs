//! HTTP/JSON facade over the session engine and the stimulus renderer.
//!
//! Every JSON response uses the envelope `{"ok": true, "data": ...}` or
//! `{"ok": false, "error": {"code", "message", "fields"?}}`. Sessions live in
//! memory and in `DATA_DIR/<session_id>.jsonl`; the logs are replayed at
//! startup.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod store;

use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use moondisp_core::engine::{Response as SubjectResponse, SessionConfig, SessionStatus, Trial};
use moondisp_core::render::{encode_png, render_stereo, CameraRig, Presentation, StereoScene};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use error::{ok, ApiError};
pub use store::{SharedSession, Store, StoreError};

pub type AppState = Arc<Store>;

pub fn router(store: AppState) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(session_status))
        .route("/v1/sessions/{id}/next", post(next_stimulus))
        .route("/v1/sessions/{id}/responses", post(submit_response))
        .route("/v1/sessions/{id}/results", get(results))
        .route("/v1/sessions/{id}/log", get(download_log))
        .route("/v1/sessions/{id}/preview", get(preview))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .with_state(store)
}

/// Serve until `shutdown` resolves, then finish in-flight requests.
pub async fn serve(
    listener: tokio::net::TcpListener,
    store: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(store))
        .with_graceful_shutdown(shutdown)
        .await
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed JSON body: {e}")))
}

async fn session(store: &Store, id: &str) -> Result<SharedSession, ApiError> {
    store.get(id).await.ok_or_else(|| ApiError::not_found(id))
}

async fn health(State(store): State<AppState>) -> Response {
    ok(
        StatusCode::OK,
        json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION"), "sessions": store.len().await }),
    )
}

#[derive(Serialize)]
struct Created {
    session_id: String,
    created_at: String,
}

async fn create_session(State(store): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let config: SessionConfig = if body.iter().all(u8::is_ascii_whitespace) {
        SessionConfig::default()
    } else {
        parse_json(&body)?
    };
    config.validate()?;
    let header = store
        .create(config)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
    tracing::info!(session = %header.session_id, "session created");
    Ok(ok(
        StatusCode::CREATED,
        Created {
            session_id: header.session_id,
            created_at: header.created_at,
        },
    ))
}

#[derive(Serialize)]
struct SessionView {
    session_id: String,
    created_at: String,
    status: SessionStatus,
    trial_count: usize,
    reversals_so_far: usize,
    reversals_target: u32,
    current_m: f64,
    pending_trial: Option<Trial>,
    config: SessionConfig,
}

async fn session_status(State(store): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let shared = session(&store, &id).await?;
    let s = shared.lock().await;
    let (header, state) = (s.header(), s.state());
    Ok(ok(
        StatusCode::OK,
        SessionView {
            session_id: header.session_id.clone(),
            created_at: header.created_at.clone(),
            status: state.status(),
            trial_count: state.trials().len(),
            reversals_so_far: state.reversals().len(),
            reversals_target: state.config().reversals,
            current_m: state.current_m(),
            pending_trial: state.pending_trial().cloned(),
            config: state.config().clone(),
        },
    ))
}

#[derive(Serialize)]
struct StimulusImage {
    format: &'static str,
    encoding: &'static str,
    width: u32,
    height: u32,
    presentation: Presentation,
    data: String,
}

#[derive(Serialize)]
struct StimulusMetadata {
    stimulus_m: f64,
    moon_angular_diameter_deg: f64,
    moon_elevation_deg: f64,
    baseline_m: f64,
    focal_px: f64,
    eye_width_px: u32,
    eye_height_px: u32,
}

async fn render_image(
    rig: CameraRig,
    scene: StereoScene,
    presentation: Presentation,
) -> Result<StimulusImage, ApiError> {
    tokio::task::spawn_blocking(move || {
        let pair = render_stereo(&rig, &scene).map_err(|e| ApiError::bad_request(e.to_string()))?;
        let composed = presentation.compose(&pair);
        let png = encode_png(&composed).map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(StimulusImage {
            format: "png",
            encoding: "base64",
            width: composed.width(),
            height: composed.height(),
            presentation,
            data: STANDARD.encode(png),
        })
    })
    .await
    .map_err(|e| ApiError::internal(format!("render task failed: {e}")))?
}

fn metadata(rig: &CameraRig, scene: &StereoScene, m: f64) -> StimulusMetadata {
    StimulusMetadata {
        stimulus_m: m,
        moon_angular_diameter_deg: scene.moon.angular_diameter_deg,
        moon_elevation_deg: scene.moon.elevation_deg,
        baseline_m: rig.baseline_m,
        focal_px: rig.focal_px,
        eye_width_px: rig.width_px,
        eye_height_px: rig.height_px,
    }
}

async fn next_stimulus(State(store): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let shared = session(&store, &id).await?;
    let (trial, rig, scene, presentation) = {
        let mut s = shared.lock().await;
        let trial = s.next_stimulus()?;
        let state = s.state();
        (
            trial.clone(),
            state.config().rig,
            state.scene_at(trial.stimulus_m),
            state.config().presentation,
        )
    };
    let meta = metadata(&rig, &scene, trial.stimulus_m);
    let image = render_image(rig, scene, presentation).await?;
    Ok(ok(
        StatusCode::OK,
        json!({ "trial_index": trial.index, "trial": trial, "image": image, "metadata": meta }),
    ))
}

async fn submit_response(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let response: SubjectResponse = parse_json(&body)?;
    let shared = session(&store, &id).await?;
    let mut s = shared.lock().await;
    s.record_response(response)?;
    let state = s.state();
    if state.is_complete() {
        tracing::info!(session = %id, "session complete");
    }
    Ok(ok(
        StatusCode::OK,
        json!({
            "status": state.status(),
            "reversals_so_far": state.reversals().len(),
            "trial_count": state.trials().len(),
        }),
    ))
}

async fn results(State(store): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let shared = session(&store, &id).await?;
    let s = shared.lock().await;
    let state = s.state();
    let pse = state.estimate_pse()?;
    Ok(ok(
        StatusCode::OK,
        json!({
            "pse": pse,
            "trial_count": state.trials().len(),
            "reversals": state.reversals(),
            "procedure": state.config().procedure,
            "log_url": format!("/v1/sessions/{id}/log"),
        }),
    ))
}

async fn download_log(State(store): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let shared = session(&store, &id).await?;
    // Hold the session so no append lands mid-read.
    let _guard = shared.lock().await;
    let bytes = std::fs::read(store.log_path(&id)).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok((StatusCode::OK, [(header::CONTENT_TYPE, "application/x-ndjson")], bytes).into_response())
}

#[derive(Deserialize)]
struct PreviewQuery {
    m: f64,
}

async fn preview(
    State(store): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<PreviewQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(PreviewQuery { m }) = query.map_err(|e| ApiError::bad_request(e.body_text()))?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(ApiError::bad_request(format!("m must be positive, got {m}")));
    }
    let shared = session(&store, &id).await?;
    let (rig, scene, presentation) = {
        let s = shared.lock().await;
        let state = s.state();
        (state.config().rig, state.scene_at(m), state.config().presentation)
    };
    let meta = metadata(&rig, &scene, m);
    let image = render_image(rig, scene, presentation).await?;
    Ok(ok(StatusCode::OK, json!({ "image": image, "metadata": meta })))
}
