//! In-process HTTP harness over a small fixture model.

#![allow(dead_code)]

use std::fs::OpenOptions;
use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tempfile::TempDir;
use tower::ServiceExt;
use wordrefit_core::codec::save_path;
use wordrefit_core::{ActionLog, EmbeddingModel, ModelFormat};
use wordrefit_cli::state::SharedState;
use wordrefit_cli::{router, AppState, ServiceConfig};

pub struct Fixture {
    pub dir: TempDir,
    pub state: SharedState,
    pub app: Router,
    pub model_path: PathBuf,
}

pub fn toy_model() -> EmbeddingModel {
    EmbeddingModel::from_rows([
        ("physics", vec![1.0, 0.2, 0.0, 0.1]),
        ("science", vec![0.5, 0.9, 0.1, 0.0]),
        ("astronomy", vec![0.9, 0.1, 0.4, 0.2]),
        ("biochemistry", vec![0.1, 0.8, 0.6, 0.1]),
        ("biology", vec![0.2, 1.0, 0.3, 0.0]),
        ("biophysics", vec![0.7, 0.6, 0.2, 0.3]),
        ("he", vec![0.1, -0.3, 0.2, 1.0]),
        ("she", vec![-0.2, 0.1, 0.3, 1.0]),
        ("nurse", vec![-0.3, 0.4, 0.9, 0.5]),
        ("doctor", vec![0.2, 0.3, 0.8, 0.6]),
        ("registered_nurse", vec![-0.4, 0.4, 1.0, 0.6]),
        ("medic", vec![0.3, 0.1, 0.7, 0.8]),
    ])
    .unwrap()
}

pub fn fixture() -> Fixture {
    fixture_with(toy_model())
}

pub fn fixture_with(model: EmbeddingModel) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.bin");
    save_path(&model, ModelFormat::Binary, &model_path).unwrap();
    let config = ServiceConfig {
        model_path: model_path.clone(),
        log_path: dir.path().join("actions.jsonl"),
        checkpoint_dir: dir.path().join("checkpoints"),
        ..Default::default()
    };
    let state = AppState::open(config).unwrap();
    Fixture {
        app: router(state.clone()),
        state,
        dir,
        model_path,
    }
}

/// Fixture whose action log cannot be written.
pub fn fixture_with_broken_log() -> Fixture {
    let mut f = fixture();
    let ro = OpenOptions::new().read(true).open(&f.model_path).unwrap();
    let config = f.state.config.clone();
    let model = wordrefit_core::codec::load_path(&f.model_path, ModelFormat::Binary, None).unwrap();
    f.state = AppState::new(config, model, ActionLog::new(), Some(ro));
    f.app = router(f.state.clone());
    f
}

pub struct Reply {
    pub status: StatusCode,
    pub bytes: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes).unwrap_or(Value::Null)
    }
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(serde_json::to_vec(&v).unwrap())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, bytes }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    call(app, Method::GET, uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> Reply {
    call(app, Method::POST, uri, Some(body)).await
}

pub async fn revision(app: &Router) -> u64 {
    get(app, "/v1/model/info").await.json()["revision"].as_u64().unwrap()
}
