//! Uniform client interface to inference services: chat-style text
//! generation and image generation, with an OpenAI-compatible HTTP
//! implementation and a deterministic mock for offline runs.

mod http;
mod mock;

use std::time::Duration;

use async_trait::async_trait;
use thiserror::Error;

pub use http::HttpBackend;
pub use mock::{MockBackend, MockScript};

/// Connection and retry settings for one inference service.
#[derive(Debug, Clone)]
pub struct BackendConfig {
    pub name: String,
    pub base_url: String,
    pub model_id: String,
    pub timeout: Duration,
    pub max_retries: u32,
    pub retry_backoff_base: Duration,
    pub max_concurrent_requests: usize,
    /// Bearer token, read from the environment, never written to disk.
    pub api_key: Option<String>,
}

impl BackendConfig {
    /// Environment variable holding this backend's API key:
    /// the uppercased name with non-alphanumerics mapped to `_`,
    /// suffixed `_API_KEY`.
    pub fn api_key_env_var(name: &str) -> String {
        let mut var: String = name
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() {
                    c.to_ascii_uppercase()
                } else {
                    '_'
                }
            })
            .collect();
        var.push_str("_API_KEY");
        var
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.name.is_empty() {
            return Err(BackendError::InvalidConfig {
                detail: "backend name must not be empty".into(),
            });
        }
        url::Url::parse(&self.base_url).map_err(|e| BackendError::InvalidConfig {
            detail: format!("invalid base_url {:?}: {e}", self.base_url),
        })?;
        if self.timeout.is_zero() {
            return Err(BackendError::InvalidConfig {
                detail: "timeout must be positive".into(),
            });
        }
        if self.max_retries > 10 {
            return Err(BackendError::InvalidConfig {
                detail: format!("max_retries must be <= 10, got {}", self.max_retries),
            });
        }
        if self.max_concurrent_requests == 0 {
            return Err(BackendError::InvalidConfig {
                detail: "max_concurrent_requests must be >= 1".into(),
            });
        }
        Ok(())
    }
}

/// One chat-style completion request.
#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub model_id: String,
    pub prompt: String,
    pub temperature: f32,
    pub max_output_tokens: u32,
    /// Unique per run, for log correlation.
    pub request_id: String,
}

impl ChatRequest {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.prompt.is_empty() {
            return Err(BackendError::InvalidRequest {
                detail: "prompt must not be empty".into(),
            });
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(BackendError::InvalidRequest {
                detail: format!("temperature must be in [0, 2], got {}", self.temperature),
            });
        }
        if self.max_output_tokens == 0 {
            return Err(BackendError::InvalidRequest {
                detail: "max_output_tokens must be positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// A chat completion; `text` is the backend payload verbatim except for a
/// trailing-whitespace trim.
#[derive(Debug, Clone)]
pub struct ChatResponse {
    pub text: String,
    pub usage: Option<TokenUsage>,
    pub latency: Duration,
    pub backend_name: String,
    pub model_id: String,
    /// Total attempts made, including the successful one.
    pub attempts: u32,
}

/// One image-generation request producing `variant_count` variants.
#[derive(Debug, Clone)]
pub struct ImageRequest {
    pub model_id: String,
    pub prompt: String,
    pub variant_count: u32,
    pub width: u32,
    pub height: u32,
    pub seed: Option<u64>,
}

impl ImageRequest {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.prompt.is_empty() {
            return Err(BackendError::InvalidRequest {
                detail: "prompt must not be empty".into(),
            });
        }
        if self.variant_count == 0 {
            return Err(BackendError::InvalidRequest {
                detail: "variant_count must be >= 1".into(),
            });
        }
        if self.width == 0 || self.height == 0 {
            return Err(BackendError::InvalidRequest {
                detail: "width and height must be positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedImage {
    pub variant_index: u32,
    pub bytes: Vec<u8>,
    /// Format tag, currently always `png`.
    pub format: String,
}

#[derive(Debug, Clone)]
pub struct ImageResult {
    pub images: Vec<GeneratedImage>,
    pub latency: Duration,
    pub attempts: u32,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend {backend} unreachable after {attempts} attempts: {detail}")]
    Unreachable {
        backend: String,
        attempts: u32,
        detail: String,
    },
    #[error("backend {backend} rejected the request with status {status}: {detail}")]
    Rejected {
        backend: String,
        status: u16,
        detail: String,
    },
    #[error("backend {backend} returned a malformed response: {detail}")]
    Malformed { backend: String, detail: String },
    #[error("backend {backend} still failing after {attempts} attempts (last status {last_status})")]
    RetriesExhausted {
        backend: String,
        attempts: u32,
        last_status: u16,
    },
    #[error("backend {backend} returned an undecodable image: {detail}")]
    ImageDecode { backend: String, detail: String },
    #[error("invalid request: {detail}")]
    InvalidRequest { detail: String },
    #[error("invalid backend config: {detail}")]
    InvalidConfig { detail: String },
}

impl BackendError {
    /// Attempts actually made before the error, where known.
    pub fn attempts(&self) -> u32 {
        match self {
            BackendError::Unreachable { attempts, .. }
            | BackendError::RetriesExhausted { attempts, .. } => *attempts,
            BackendError::Rejected { .. }
            | BackendError::Malformed { .. }
            | BackendError::ImageDecode { .. } => 1,
            _ => 0,
        }
    }
}

/// A handle to one inference service. Safe for concurrent use; admission
/// is limited internally to the configured number of in-flight requests.
#[async_trait]
pub trait InferenceBackend: Send + Sync {
    fn name(&self) -> &str;
    fn model_id(&self) -> &str;
    async fn complete_chat(&self, req: &ChatRequest) -> Result<ChatResponse, BackendError>;
    async fn generate_images(&self, req: &ImageRequest) -> Result<ImageResult, BackendError>;
}
