use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{EmbedError, EmbeddingProvider, EmbeddingVector, Role};

#[derive(Debug, Clone)]
pub struct RemoteEmbeddingConfig {
    pub url: String,
    /// Sent as `model` so one endpoint can serve both encoders.
    pub model: Option<String>,
    pub token: Option<String>,
    pub dim: usize,
    pub batch_size: usize,
    /// Upper bound on concurrent in-flight requests.
    pub max_in_flight: usize,
    /// Extra attempts after a transport failure.
    pub retries: usize,
    pub timeout: Duration,
}

impl RemoteEmbeddingConfig {
    pub fn new(url: impl Into<String>, dim: usize) -> Self {
        RemoteEmbeddingConfig {
            url: url.into(),
            model: None,
            token: None,
            dim,
            batch_size: 32,
            max_in_flight: 4,
            retries: 2,
            timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a str>,
    texts: &'a [String],
    role: Role,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f32>>,
}

/// Embedding provider backed by an HTTP endpoint that accepts
/// `{"texts": [...], "role": "query"|"document"}` and answers
/// `{"vectors": [[...], ...]}`.
pub struct RemoteEmbeddingProvider {
    config: RemoteEmbeddingConfig,
    agent: ureq::Agent,
}

impl RemoteEmbeddingProvider {
    pub fn new(config: RemoteEmbeddingConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        RemoteEmbeddingProvider { config, agent }
    }

    fn request(&self, texts: &[String], role: Role) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let body = EmbedRequest {
            model: self.config.model.as_deref(),
            texts,
            role,
        };
        let mut last_err = String::new();
        for _ in 0..=self.config.retries {
            let mut req = self.agent.post(&self.config.url);
            if let Some(token) = &self.config.token {
                req = req.header("Authorization", &format!("Bearer {token}"));
            }
            match req.send_json(&body) {
                Ok(mut resp) => {
                    let parsed: EmbedResponse = resp
                        .body_mut()
                        .read_json()
                        .map_err(|e| EmbedError::BadResponse(e.to_string()))?;
                    return self.validate(parsed, texts.len());
                }
                Err(ureq::Error::StatusCode(code)) if code < 500 => {
                    return Err(EmbedError::Unavailable(format!("HTTP status {code}")));
                }
                Err(e) => last_err = e.to_string(),
            }
        }
        Err(EmbedError::Unavailable(last_err))
    }

    fn validate(&self, resp: EmbedResponse, expected: usize) -> Result<Vec<EmbeddingVector>, EmbedError> {
        if resp.vectors.len() != expected {
            return Err(EmbedError::BadResponse(format!(
                "expected {expected} vectors, got {}",
                resp.vectors.len()
            )));
        }
        resp.vectors
            .into_iter()
            .map(|v| {
                if v.len() != self.config.dim {
                    return Err(EmbedError::DimMismatch {
                        expected: self.config.dim,
                        found: v.len(),
                    });
                }
                EmbeddingVector::normalize(v)
            })
            .collect()
    }
}

impl EmbeddingProvider for RemoteEmbeddingProvider {
    fn dim(&self) -> usize {
        self.config.dim
    }

    fn embed_batch(&self, texts: &[String], role: Role) -> Result<Vec<EmbeddingVector>, EmbedError> {
        if texts.iter().any(String::is_empty) {
            return Err(EmbedError::EmptyText);
        }
        let batches: Vec<&[String]> = texts.chunks(self.config.batch_size.max(1)).collect();
        if batches.len() <= 1 || self.config.max_in_flight <= 1 {
            let mut out = Vec::with_capacity(texts.len());
            for batch in batches {
                out.extend(self.request(batch, role)?);
            }
            return Ok(out);
        }

        type BatchResult = Result<Vec<EmbeddingVector>, EmbedError>;
        let results: Mutex<Vec<Option<BatchResult>>> =
            Mutex::new((0..batches.len()).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        let workers = self.config.max_in_flight.min(batches.len());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(batch) = batches.get(i) else { break };
                    let res = self.request(batch, role);
                    results.lock().unwrap()[i] = Some(res);
                });
            }
        });
        let mut out = Vec::with_capacity(texts.len());
        for res in results.into_inner().unwrap() {
            out.extend(res.expect("every batch is processed")?);
        }
        Ok(out)
    }
}
