//! OpenAI-compatible HTTP backend: `/v1/chat/completions` for all text
//! stages and `/v1/images/generations` for images.
//!
//! Transient failures (connect errors, timeouts, 429, 5xx) are retried
//! with exponential backoff and full jitter, capped at 30 seconds. Other
//! 4xx responses are rejected immediately.

use std::sync::Arc;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use base64::Engine;
use rand::Rng;
use serde::Deserialize;
use serde_json::json;
use tokio::sync::Semaphore;
use tracing::{debug, warn};

use super::{
    BackendConfig, BackendError, ChatRequest, ChatResponse, GeneratedImage, ImageRequest,
    ImageResult, InferenceBackend, TokenUsage,
};

const BACKOFF_CAP: Duration = Duration::from_secs(30);

pub struct HttpBackend {
    cfg: BackendConfig,
    client: reqwest::Client,
    limiter: Arc<Semaphore>,
}

#[derive(Debug, Deserialize)]
struct ChatCompletionPayload {
    choices: Vec<ChatChoice>,
    #[serde(default)]
    usage: Option<UsagePayload>,
}

#[derive(Debug, Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Debug, Deserialize)]
struct ChatMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Debug, Deserialize)]
struct UsagePayload {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

#[derive(Debug, Deserialize)]
struct ImagesPayload {
    data: Vec<ImageDatum>,
}

#[derive(Debug, Deserialize)]
struct ImageDatum {
    #[serde(default)]
    b64_json: Option<String>,
}

enum AttemptFailure {
    /// Connect error or timeout.
    Transport(String),
    /// Retryable HTTP status (429 or 5xx).
    Status(u16),
}

impl HttpBackend {
    pub fn new(cfg: BackendConfig) -> Result<Self, BackendError> {
        cfg.validate()?;
        let client = reqwest::Client::builder()
            .timeout(cfg.timeout)
            .connect_timeout(cfg.timeout.min(Duration::from_secs(10)))
            .build()
            .map_err(|e| BackendError::InvalidConfig {
                detail: format!("failed to build HTTP client: {e}"),
            })?;
        let limiter = Arc::new(Semaphore::new(cfg.max_concurrent_requests));
        Ok(HttpBackend {
            cfg,
            client,
            limiter,
        })
    }

    fn endpoint(&self, path: &str) -> String {
        format!("{}{}", self.cfg.base_url.trim_end_matches('/'), path)
    }

    fn backoff_delay(&self, attempt: u32) -> Duration {
        let exp = self
            .cfg
            .retry_backoff_base
            .saturating_mul(2u32.saturating_pow(attempt))
            .min(BACKOFF_CAP);
        if exp.is_zero() {
            return exp;
        }
        // Full jitter: uniform in [0, exp].
        let nanos = rand::rng().random_range(0..=exp.as_nanos() as u64);
        Duration::from_nanos(nanos)
    }

    /// Issue one request per attempt until success, a non-retryable error,
    /// or retry exhaustion. Returns the parsed value and attempts made.
    async fn send_with_retries<T, F>(
        &self,
        path: &str,
        body: serde_json::Value,
        parse: F,
    ) -> Result<(T, u32), BackendError>
    where
        F: Fn(&str) -> Result<T, String>,
    {
        let _permit = self
            .limiter
            .acquire()
            .await
            .expect("limiter semaphore closed");
        let url = self.endpoint(path);
        let mut last_failure: Option<AttemptFailure> = None;

        for attempt in 0..=self.cfg.max_retries {
            if attempt > 0 {
                tokio::time::sleep(self.backoff_delay(attempt - 1)).await;
            }
            let mut request = self.client.post(&url).json(&body);
            if let Some(key) = &self.cfg.api_key {
                request = request.bearer_auth(key);
            }
            match request.send().await {
                Err(e) => {
                    warn!(backend = %self.cfg.name, attempt, error = %e, "transport failure");
                    last_failure = Some(AttemptFailure::Transport(e.to_string()));
                }
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        let text = response.text().await.map_err(|e| BackendError::Malformed {
                            backend: self.cfg.name.clone(),
                            detail: format!("failed to read body: {e}"),
                        })?;
                        let value = parse(&text).map_err(|detail| BackendError::Malformed {
                            backend: self.cfg.name.clone(),
                            detail,
                        })?;
                        return Ok((value, attempt + 1));
                    }
                    let code = status.as_u16();
                    if code == 429 || status.is_server_error() {
                        warn!(backend = %self.cfg.name, attempt, status = code, "retryable status");
                        last_failure = Some(AttemptFailure::Status(code));
                    } else {
                        let detail = response.text().await.unwrap_or_default();
                        return Err(BackendError::Rejected {
                            backend: self.cfg.name.clone(),
                            status: code,
                            detail,
                        });
                    }
                }
            }
        }

        let attempts = self.cfg.max_retries + 1;
        Err(match last_failure {
            Some(AttemptFailure::Transport(detail)) => BackendError::Unreachable {
                backend: self.cfg.name.clone(),
                attempts,
                detail,
            },
            Some(AttemptFailure::Status(last_status)) => BackendError::RetriesExhausted {
                backend: self.cfg.name.clone(),
                attempts,
                last_status,
            },
            None => unreachable!("loop ran at least once"),
        })
    }
}

#[async_trait]
impl InferenceBackend for HttpBackend {
    fn name(&self) -> &str {
        &self.cfg.name
    }

    fn model_id(&self) -> &str {
        &self.cfg.model_id
    }

    async fn complete_chat(&self, req: &ChatRequest) -> Result<ChatResponse, BackendError> {
        req.validate()?;
        debug!(backend = %self.cfg.name, request_id = %req.request_id, "chat request");
        let body = json!({
            "model": req.model_id,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        });
        let started = Instant::now();
        let (payload, attempts) = self
            .send_with_retries("/v1/chat/completions", body, |text| {
                serde_json::from_str::<ChatCompletionPayload>(text)
                    .map_err(|e| format!("chat payload: {e}"))
            })
            .await?;
        let content = payload
            .choices
            .first()
            .and_then(|c| c.message.content.as_deref())
            .ok_or_else(|| BackendError::Malformed {
                backend: self.cfg.name.clone(),
                detail: "no choices[0].message.content in response".into(),
            })?;
        Ok(ChatResponse {
            text: content.trim_end().to_string(),
            usage: payload.usage.map(|u| TokenUsage {
                prompt_tokens: u.prompt_tokens,
                completion_tokens: u.completion_tokens,
            }),
            latency: started.elapsed(),
            backend_name: self.cfg.name.clone(),
            model_id: req.model_id.clone(),
            attempts,
        })
    }

    async fn generate_images(&self, req: &ImageRequest) -> Result<ImageResult, BackendError> {
        req.validate()?;
        let mut body = json!({
            "model": req.model_id,
            "prompt": req.prompt,
            "n": req.variant_count,
            "size": format!("{}x{}", req.width, req.height),
            "response_format": "b64_json",
        });
        if let Some(seed) = req.seed {
            body["seed"] = json!(seed);
        }
        let started = Instant::now();
        let (payload, attempts) = self
            .send_with_retries("/v1/images/generations", body, |text| {
                serde_json::from_str::<ImagesPayload>(text)
                    .map_err(|e| format!("images payload: {e}"))
            })
            .await?;
        if payload.data.len() != req.variant_count as usize {
            return Err(BackendError::Malformed {
                backend: self.cfg.name.clone(),
                detail: format!(
                    "requested {} variants, got {}",
                    req.variant_count,
                    payload.data.len()
                ),
            });
        }
        let mut images = Vec::with_capacity(payload.data.len());
        for (i, datum) in payload.data.into_iter().enumerate() {
            let b64 = datum.b64_json.ok_or_else(|| BackendError::Malformed {
                backend: self.cfg.name.clone(),
                detail: format!("image {i} missing b64_json"),
            })?;
            let bytes = base64::engine::general_purpose::STANDARD
                .decode(b64.as_bytes())
                .map_err(|e| BackendError::ImageDecode {
                    backend: self.cfg.name.clone(),
                    detail: format!("image {i} base64: {e}"),
                })?;
            image::load_from_memory_with_format(&bytes, image::ImageFormat::Png).map_err(
                |e| BackendError::ImageDecode {
                    backend: self.cfg.name.clone(),
                    detail: format!("image {i} is not valid PNG: {e}"),
                },
            )?;
            images.push(GeneratedImage {
                variant_index: i as u32,
                bytes,
                format: "png".to_string(),
            });
        }
        Ok(ImageResult {
            images,
            latency: started.elapsed(),
            attempts,
        })
    }
}
