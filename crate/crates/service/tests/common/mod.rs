#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use mariomix_core::solver::Policy;
use mariomix_core::{
    bundled_levels, characterize, parse_level, Action, DatasetEntry, Level, PolicyDataset, Provenance,
};
use mariomix_service::{api_router, AppState, ServiceConfig};
use serde_json::Value;
use tower::ServiceExt;

/// Flat 60-wide level, plus a pit at column 8 when `pit` is set.
pub fn flat(pit: bool) -> Level {
    let w = 60;
    let mut ground: Vec<char> = "#".repeat(w).chars().collect();
    if pit {
        ground[8] = '.';
    }
    let ground: String = ground.into_iter().collect();
    let text = format!(
        "{}G\n{}\n.M{}\n{ground}\n{ground}\n",
        ".".repeat(w - 1),
        ".".repeat(w),
        ".".repeat(w - 2)
    );
    parse_level(if pit { "pit" } else { "flat" }, &text).unwrap()
}

pub fn levels() -> Vec<Level> {
    let mut v = bundled_levels();
    v.push(flat(false));
    v.push(flat(true));
    v
}

/// A handful of constant policies, characterized on the bundled levels.
pub fn constant_dataset() -> PolicyDataset {
    let levels = bundled_levels();
    let entries = [
        ("Walker", Action::WalkRight),
        ("Runner", Action::RunRight),
        ("Jumper", Action::JumpRight),
        ("Hopper", Action::QuickJumpRight),
        ("Idler", Action::DoNothing),
    ]
    .into_iter()
    .map(|(name, a)| {
        let policy = Policy::constant(name, a);
        let metrics = characterize(&policy, &levels, 1, 0).unwrap();
        DatasetEntry {
            display_name: name.to_string(),
            policy,
            metrics,
        }
    })
    .collect();
    PolicyDataset::new(
        Provenance {
            level_ids: levels.iter().map(|l| l.id.clone()).collect(),
            runs_per_level: 1,
            seed: 0,
            explore_budget: 0,
        },
        entries,
    )
    .unwrap()
}

pub fn app() -> Router {
    api_router(AppState::new(levels(), Some(constant_dataset()), ServiceConfig::default()))
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call_raw(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

pub async fn call_raw(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}
