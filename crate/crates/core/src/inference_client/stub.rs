//! In-process server speaking the embedding protocol, for tests and demos.
//!
//! Vectors are deterministic unit vectors seeded from a hash of
//! `(model, modality, payload)`, so a payload always embeds the same way.
//! Faults can be injected per payload.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tokio::task::JoinHandle;
use url::Url;

use super::{ContentKind, EmbedRequest};

#[derive(Debug, Clone)]
pub struct StubConfig {
    pub dim: usize,
    pub space: String,
    pub model_version: String,
    /// Models the server accepts; anything else is a 400.
    pub models: Vec<String>,
    /// Returned for every request instead of the hashed vector.
    pub fixed_vector: Option<Vec<f32>>,
    /// Upper bound of a per-payload deterministic response delay.
    pub max_jitter: Duration,
    pub ready: bool,
}

impl Default for StubConfig {
    fn default() -> Self {
        Self {
            dim: 16,
            space: "stub".into(),
            model_version: "stub-1".into(),
            models: vec!["stub".into()],
            fixed_vector: None,
            max_jitter: Duration::ZERO,
            ready: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fault {
    /// Every request answers with this status.
    Status(u16),
    /// The first `count` requests answer with `status`, later ones succeed.
    FailTimes { count: u32, status: u16 },
    /// A `NaN` literal inside the vector.
    NanVector,
    /// `dim` claims one more value than the vector holds.
    ShortVector,
    /// Sleep before answering normally.
    Delay(Duration),
}

struct Shared {
    config: StubConfig,
    ready: AtomicBool,
    faults: Mutex<HashMap<String, Fault>>,
    hits: Mutex<HashMap<String, u32>>,
}

pub struct StubServer {
    addr: SocketAddr,
    shared: Arc<Shared>,
    task: JoinHandle<()>,
}

fn hash_seed(parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// The vector the stub returns for a request, absent faults and fixed vectors.
pub fn stub_vector(model: &str, modality: &str, payload: &str, dim: usize) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(hash_seed(&[model, modality, payload]));
    let v: Vec<f64> = (0..dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| (x / n) as f32).collect()
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_body(message: &str) -> String {
    json!({ "error": message }).to_string()
}

fn status(code: u16) -> StatusCode {
    StatusCode::from_u16(code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
}

// Either a finished success body or a status + message.
enum Outcome {
    Ok(Value),
    Raw(String),
    Err(StatusCode, String),
}

impl Shared {
    fn check(&self, request: &EmbedRequest) -> Result<(), (StatusCode, String)> {
        if !self.config.models.contains(&request.model) {
            return Err((
                StatusCode::BAD_REQUEST,
                format!("unknown model {:?}", request.model),
            ));
        }
        if request.payload.is_empty() {
            return Err((StatusCode::BAD_REQUEST, "empty payload".into()));
        }
        if request.content_kind == ContentKind::Base64 && request.validate().is_err() {
            return Err((
                StatusCode::UNPROCESSABLE_ENTITY,
                "payload is not base64".into(),
            ));
        }
        Ok(())
    }

    fn jitter(&self, payload: &str) -> Duration {
        let max = self.config.max_jitter.as_micros() as u64;
        if max == 0 {
            return Duration::ZERO;
        }
        Duration::from_micros(hash_seed(&["jitter", payload]) % (max + 1))
    }

    async fn answer(&self, request: &EmbedRequest) -> Outcome {
        if let Err((code, msg)) = self.check(request) {
            return Outcome::Err(code, msg);
        }
        let hit = {
            let mut hits = self.hits.lock().expect("lock");
            let n = hits.entry(request.payload.clone()).or_insert(0);
            *n += 1;
            *n
        };
        tokio::time::sleep(self.jitter(&request.payload)).await;

        let fault = self
            .faults
            .lock()
            .expect("lock")
            .get(&request.payload)
            .cloned();
        let vector = self.config.fixed_vector.clone().unwrap_or_else(|| {
            stub_vector(
                &request.model,
                request.modality.as_str(),
                &request.payload,
                self.config.dim,
            )
        });
        let body = |dim: usize, vector: &[f32]| {
            json!({
                "dim": dim,
                "vector": vector,
                "space": self.config.space,
                "model_version": self.config.model_version,
            })
        };
        match fault {
            Some(Fault::Status(code)) => Outcome::Err(status(code), "injected failure".into()),
            Some(Fault::FailTimes {
                count,
                status: code,
            }) if hit <= count => {
                Outcome::Err(status(code), format!("injected failure {hit} of {count}"))
            }
            Some(Fault::NanVector) => {
                let mut values: Vec<String> = vector.iter().map(|x| x.to_string()).collect();
                values[0] = "NaN".into();
                Outcome::Raw(format!(
                    r#"{{"dim":{},"vector":[{}],"space":{},"model_version":{}}}"#,
                    vector.len(),
                    values.join(","),
                    json!(self.config.space),
                    json!(self.config.model_version),
                ))
            }
            Some(Fault::ShortVector) => Outcome::Ok(body(vector.len(), &vector[1..])),
            Some(Fault::Delay(d)) => {
                tokio::time::sleep(d).await;
                Outcome::Ok(body(vector.len(), &vector))
            }
            _ => Outcome::Ok(body(vector.len(), &vector)),
        }
    }
}

async fn health(State(shared): State<Arc<Shared>>) -> Response {
    if !shared.ready.load(Ordering::SeqCst) {
        return json_response(
            StatusCode::SERVICE_UNAVAILABLE,
            error_body("models loading"),
        );
    }
    json_response(
        StatusCode::OK,
        json!({ "status": "ok", "models": shared.config.models }).to_string(),
    )
}

async fn embed(State(shared): State<Arc<Shared>>, body: Bytes) -> Response {
    if !shared.ready.load(Ordering::SeqCst) {
        return json_response(
            StatusCode::SERVICE_UNAVAILABLE,
            error_body("models loading"),
        );
    }
    let request: EmbedRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => {
            return json_response(StatusCode::UNPROCESSABLE_ENTITY, error_body(&e.to_string()))
        }
    };
    match shared.answer(&request).await {
        Outcome::Ok(v) => json_response(StatusCode::OK, v.to_string()),
        Outcome::Raw(s) => json_response(StatusCode::OK, s),
        Outcome::Err(code, msg) => json_response(code, error_body(&msg)),
    }
}

async fn embed_batch(State(shared): State<Arc<Shared>>, body: Bytes) -> Response {
    if !shared.ready.load(Ordering::SeqCst) {
        return json_response(
            StatusCode::SERVICE_UNAVAILABLE,
            error_body("models loading"),
        );
    }
    let items: Vec<Value> = match serde_json::from_slice::<Value>(&body)
        .ok()
        .and_then(|v| v.get("items").and_then(|i| i.as_array()).cloned())
    {
        Some(items) => items,
        None => {
            return json_response(
                StatusCode::UNPROCESSABLE_ENTITY,
                error_body("expected {\"items\":[...]}"),
            )
        }
    };
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        let answer = match serde_json::from_value::<EmbedRequest>(item) {
            Ok(r) => shared.answer(&r).await,
            Err(e) => Outcome::Err(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
        };
        out.push(match answer {
            Outcome::Ok(v) => v,
            // JSON cannot carry NaN inside a batch
            Outcome::Raw(_) => json!({ "error": "non-finite output" }),
            Outcome::Err(_, msg) => json!({ "error": msg }),
        });
    }
    json_response(StatusCode::OK, json!({ "items": out }).to_string())
}

impl StubServer {
    /// Binds an ephemeral localhost port and serves until dropped.
    pub async fn start(config: StubConfig) -> std::io::Result<Self> {
        let shared = Arc::new(Shared {
            ready: AtomicBool::new(config.ready),
            config,
            faults: Mutex::new(HashMap::new()),
            hits: Mutex::new(HashMap::new()),
        });
        let app = Router::new()
            .route("/v1/health", get(health))
            .route("/v1/embed", post(embed))
            .route("/v1/embed_batch", post(embed_batch))
            .with_state(shared.clone());
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
        let addr = listener.local_addr()?;
        let task = tokio::spawn(async move {
            let _ = axum::serve(listener, app).await;
        });
        Ok(Self { addr, shared, task })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> Url {
        Url::parse(&format!("http://{}/", self.addr)).expect("valid url")
    }

    pub fn inject(&self, payload: impl Into<String>, fault: Fault) {
        self.shared
            .faults
            .lock()
            .expect("lock")
            .insert(payload.into(), fault);
    }

    pub fn set_ready(&self, ready: bool) {
        self.shared.ready.store(ready, Ordering::SeqCst);
    }

    /// Requests that reached the model for `payload`, including failed ones.
    pub fn hits(&self, payload: &str) -> u32 {
        self.shared
            .hits
            .lock()
            .expect("lock")
            .get(payload)
            .copied()
            .unwrap_or(0)
    }

    pub fn total_hits(&self) -> u32 {
        self.shared.hits.lock().expect("lock").values().sum()
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.task.abort();
    }
}
