//! HTTP+JSON client for an external embedding service.
//!
//! Protocol:
//!
//! - `GET  /v1/health` → `200 {"status":"ok","models":[string]}`
//! - `POST /v1/embed` with an [`EmbedRequest`] body →
//!   `200 {"dim":int,"vector":[num],"space":string,"model_version":string}`;
//!   400/422 on bad input, 503 while models load.
//! - `POST /v1/embed_batch` with `{"items":[EmbedRequest]}` →
//!   `{"items":[EmbedResponse | {"error":string}]}`, positional.
//!
//! The client never looks at media. Video is sent as pre-extracted frames,
//! one manifest entry per frame sharing the clip's id, and the frame
//! embeddings are pooled here with [`mean_pool_frames`].

#[cfg(feature = "stub-server")]
pub mod stub;

use std::collections::HashMap;
use std::time::Duration;

use base64::Engine;
use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use crate::dataset::{EmbeddingFile, EmbeddingRecord};
use crate::embedding::{mean_pool_frames, Embedding, ModalityId, Pooling, SpaceId};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum ClientError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("request timed out")]
    Timeout,
    #[error("server error {status}: {message}")]
    ServerError { status: u16, message: String },
    #[error("request rejected with {status}: {message}")]
    BadRequest { status: u16, message: String },
    #[error("batch item rejected: {0}")]
    ItemRejected(String),
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("all {0} manifest entries failed")]
    AllFailed(usize),
}

impl ClientError {
    /// Timeouts, connection failures and 5xx responses are worth retrying.
    pub fn is_transient(&self) -> bool {
        matches!(
            self,
            Self::Timeout | Self::ServerError { .. } | Self::Transport(_)
        )
    }
}

impl From<reqwest::Error> for ClientError {
    fn from(e: reqwest::Error) -> Self {
        if e.is_timeout() {
            Self::Timeout
        } else {
            Self::Transport(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContentKind {
    Text,
    Url,
    Base64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedRequest {
    pub modality: ModalityId,
    pub content_kind: ContentKind,
    pub payload: String,
    pub model: String,
}

impl EmbedRequest {
    pub fn validate(&self) -> Result<(), ClientError> {
        if self.payload.is_empty() {
            return Err(ClientError::InvalidRequest("payload is empty".into()));
        }
        if self.model.is_empty() {
            return Err(ClientError::InvalidRequest("model is empty".into()));
        }
        if self.content_kind == ContentKind::Base64 {
            base64::engine::general_purpose::STANDARD
                .decode(&self.payload)
                .map_err(|e| ClientError::InvalidRequest(format!("payload is not base64: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub dim: usize,
    pub vector: Vec<f32>,
    pub space: SpaceId,
    pub model_version: String,
}

// Wire shape before validation; `vector` entries may be null or out of f32 range.
#[derive(Deserialize)]
struct RawResponse {
    dim: usize,
    vector: Vec<Option<f64>>,
    space: String,
    model_version: String,
}

impl RawResponse {
    fn validate(self) -> Result<EmbedResponse, ClientError> {
        if self.vector.len() != self.dim {
            return Err(ClientError::ProtocolViolation(format!(
                "dim is {} but vector has {} values",
                self.dim,
                self.vector.len()
            )));
        }
        if self.dim == 0 {
            return Err(ClientError::ProtocolViolation("empty vector".into()));
        }
        let vector = self
            .vector
            .into_iter()
            .enumerate()
            .map(|(i, v)| match v.map(|x| x as f32) {
                Some(x) if x.is_finite() => Ok(x),
                _ => Err(ClientError::ProtocolViolation(format!(
                    "vector[{i}] is not a finite number"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let space =
            SpaceId::new(self.space).map_err(|e| ClientError::ProtocolViolation(e.to_string()))?;
        Ok(EmbedResponse {
            dim: self.dim,
            vector,
            space,
            model_version: self.model_version,
        })
    }
}

fn parse_response(body: &[u8]) -> Result<EmbedResponse, ClientError> {
    serde_json::from_slice::<RawResponse>(body)
        .map_err(|e| ClientError::ProtocolViolation(format!("malformed response: {e}")))?
        .validate()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub models: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub timeout: Duration,
    /// Extra attempts after the first, for transient failures only.
    pub max_retries: u32,
    /// Delay before the first retry; doubled on each further retry.
    pub initial_backoff: Duration,
    pub bearer_token: Option<String>,
}

impl Default for ClientConfig {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(30),
            max_retries: 3,
            initial_backoff: Duration::from_millis(100),
            bearer_token: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmbedClient {
    http: reqwest::Client,
    base: Url,
    config: ClientConfig,
}

fn error_message(body: &[u8]) -> String {
    serde_json::from_slice::<serde_json::Value>(body)
        .ok()
        .and_then(|v| v.get("error").and_then(|e| e.as_str()).map(str::to_owned))
        .unwrap_or_else(|| String::from_utf8_lossy(body).into_owned())
}

impl EmbedClient {
    pub fn new(endpoint: &Url, config: ClientConfig) -> Result<Self, ClientError> {
        let mut base = endpoint.clone();
        if !base.path().ends_with('/') {
            let path = format!("{}/", base.path());
            base.set_path(&path);
        }
        let http = reqwest::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        Ok(Self { http, base, config })
    }

    fn url(&self, path: &str) -> Url {
        self.base.join(path).expect("static relative path")
    }

    async fn send(&self, request: reqwest::RequestBuilder) -> Result<Vec<u8>, ClientError> {
        let request = match &self.config.bearer_token {
            Some(token) => request.bearer_auth(token),
            None => request,
        };
        let response = request.send().await?;
        let status = response.status();
        let body = response.bytes().await?.to_vec();
        if status.is_success() {
            Ok(body)
        } else if status.is_client_error() {
            Err(ClientError::BadRequest {
                status: status.as_u16(),
                message: error_message(&body),
            })
        } else if status.is_server_error() {
            Err(ClientError::ServerError {
                status: status.as_u16(),
                message: error_message(&body),
            })
        } else {
            Err(ClientError::ProtocolViolation(format!(
                "unexpected status {status}"
            )))
        }
    }

    async fn with_retries<T, F, Fut>(&self, mut attempt: F) -> Result<T, ClientError>
    where
        F: FnMut() -> Fut,
        Fut: std::future::Future<Output = Result<T, ClientError>>,
    {
        let mut delay = self.config.initial_backoff;
        let mut retries_left = self.config.max_retries;
        loop {
            match attempt().await {
                Err(e) if e.is_transient() && retries_left > 0 => {
                    retries_left -= 1;
                    tokio::time::sleep(delay).await;
                    delay *= 2;
                }
                other => return other,
            }
        }
    }

    pub async fn health(&self) -> Result<Health, ClientError> {
        let body = self.send(self.http.get(self.url("v1/health"))).await?;
        serde_json::from_slice(&body)
            .map_err(|e| ClientError::ProtocolViolation(format!("malformed health response: {e}")))
    }

    /// Embeds one item, retrying transient failures with exponential backoff.
    pub async fn embed(&self, request: &EmbedRequest) -> Result<EmbedResponse, ClientError> {
        request.validate()?;
        self.with_retries(|| async {
            let body = self
                .send(self.http.post(self.url("v1/embed")).json(request))
                .await?;
            parse_response(&body)
        })
        .await
    }

    /// Positional batch call; per-item failures are returned in place.
    pub async fn embed_batch(
        &self,
        requests: &[EmbedRequest],
    ) -> Result<Vec<Result<EmbedResponse, ClientError>>, ClientError> {
        for r in requests {
            r.validate()?;
        }
        #[derive(Serialize)]
        struct Batch<'a> {
            items: &'a [EmbedRequest],
        }
        #[derive(Deserialize)]
        struct BatchOut {
            items: Vec<serde_json::Value>,
        }
        let body = self
            .with_retries(|| async {
                self.send(
                    self.http
                        .post(self.url("v1/embed_batch"))
                        .json(&Batch { items: requests }),
                )
                .await
            })
            .await?;
        let out: BatchOut = serde_json::from_slice(&body).map_err(|e| {
            ClientError::ProtocolViolation(format!("malformed batch response: {e}"))
        })?;
        if out.items.len() != requests.len() {
            return Err(ClientError::ProtocolViolation(format!(
                "sent {} items, got {} back",
                requests.len(),
                out.items.len()
            )));
        }
        Ok(out
            .items
            .into_iter()
            .map(|item| match item.get("error").and_then(|e| e.as_str()) {
                Some(msg) => Err(ClientError::ItemRejected(msg.to_owned())),
                None => serde_json::from_value::<RawResponse>(item)
                    .map_err(|e| ClientError::ProtocolViolation(format!("malformed item: {e}")))
                    .and_then(RawResponse::validate),
            })
            .collect())
    }

    /// Embeds every manifest entry with at most `parallelism` requests in
    /// flight. Records come back in manifest order whatever the completion
    /// order; entries sharing an id are frames of one clip and are pooled.
    /// Per-id failures are collected, not fatal.
    pub async fn embed_manifest(
        &self,
        manifest: &Manifest,
        parallelism: usize,
        pooling: Pooling,
    ) -> Result<ManifestOutcome, ClientError> {
        if parallelism == 0 {
            return Err(ClientError::InvalidRequest(
                "parallelism must be positive".into(),
            ));
        }
        let requests: Vec<EmbedRequest> = manifest.requests().collect();
        let mut results: Vec<(usize, Result<EmbedResponse, ClientError>)> =
            stream::iter(requests.into_iter().enumerate())
                .map(|(i, r)| {
                    let client = self.clone();
                    async move { (i, client.embed(&r).await) }
                })
                .buffer_unordered(parallelism)
                .collect()
                .await;
        results.sort_by_key(|(i, _)| *i);
        let results: Vec<_> = results.into_iter().map(|(_, r)| r).collect();
        assemble(manifest, results, pooling)
    }
}

/// One-shot helper: a client with the given timeout and default retry policy.
pub async fn embed(
    request: &EmbedRequest,
    endpoint: &Url,
    timeout: Duration,
) -> Result<EmbedResponse, ClientError> {
    EmbedClient::new(
        endpoint,
        ClientConfig {
            timeout,
            ..ClientConfig::default()
        },
    )?
    .embed(request)
    .await
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub content_kind: ContentKind,
    pub payload: String,
}

/// Items to embed with one model for one modality.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub modality: ModalityId,
    pub model: String,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    fn requests(&self) -> impl Iterator<Item = EmbedRequest> + '_ {
        self.entries.iter().map(|e| EmbedRequest {
            modality: self.modality.clone(),
            content_kind: e.content_kind,
            payload: e.payload.clone(),
            model: self.model.clone(),
        })
    }

    /// Parses `{"id","content_kind","payload"}` JSON lines.
    pub fn from_jsonl(modality: ModalityId, model: String, text: &str) -> crate::Result<Self> {
        let entries = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| crate::Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<crate::Result<_>>()?;
        Ok(Self {
            modality,
            model,
            entries,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemFailure {
    pub id: String,
    pub error: ClientError,
}

#[derive(Debug, Clone)]
pub struct ManifestOutcome {
    pub file: EmbeddingFile,
    pub failures: Vec<ItemFailure>,
    pub model_version: Option<String>,
}

fn assemble(
    manifest: &Manifest,
    results: Vec<Result<EmbedResponse, ClientError>>,
    pooling: Pooling,
) -> Result<ManifestOutcome, ClientError> {
    // ids in first-appearance order, each with its frame indices
    let mut order: Vec<&str> = Vec::new();
    let mut frames: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, e) in manifest.entries.iter().enumerate() {
        frames
            .entry(e.id.as_str())
            .or_insert_with(|| {
                order.push(e.id.as_str());
                Vec::new()
            })
            .push(i);
    }

    let mut header: Option<(SpaceId, usize)> = None;
    let mut model_version = None;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for id in order {
        let outcome = (|| {
            let mut embeddings = Vec::new();
            for &i in &frames[id] {
                let response = results[i].clone()?;
                match &header {
                    None => header = Some((response.space.clone(), response.dim)),
                    Some((space, dim)) if *space != response.space || *dim != response.dim => {
                        return Err(ClientError::ProtocolViolation(format!(
                            "response is {}/{} but earlier responses were {space}/{dim}",
                            response.space, response.dim
                        )));
                    }
                    Some(_) => {}
                }
                model_version.get_or_insert_with(|| response.model_version.clone());
                embeddings.push(
                    Embedding::new(response.vector, manifest.modality.clone(), response.space)
                        .map_err(|e| ClientError::ProtocolViolation(e.to_string()))?,
                );
            }
            if embeddings.len() == 1 {
                Ok(embeddings.pop().expect("one element").into_values())
            } else {
                mean_pool_frames(&embeddings, pooling)
                    .map(Embedding::into_values)
                    .map_err(|e| ClientError::ProtocolViolation(format!("pooling failed: {e}")))
            }
        })();
        match outcome {
            Ok(values) => records.push(EmbeddingRecord {
                id: id.to_owned(),
                values,
            }),
            Err(error) => failures.push(ItemFailure {
                id: id.to_owned(),
                error,
            }),
        }
    }

    if records.is_empty() && !failures.is_empty() {
        return Err(ClientError::AllFailed(failures.len()));
    }
    let (space, dim) = match header {
        Some(h) => h,
        None => (
            SpaceId::new(manifest.model.clone())
                .map_err(|e| ClientError::InvalidRequest(e.to_string()))?,
            0,
        ),
    };
    let file = EmbeddingFile::new(manifest.modality.clone(), space, dim, records)
        .map_err(|e| ClientError::ProtocolViolation(e.to_string()))?;
    Ok(ManifestOutcome {
        file,
        failures,
        model_version,
    })
}
