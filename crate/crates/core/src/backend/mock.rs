//! Deterministic mock backend for offline runs and golden tests.
//!
//! Chat replies come from a substring-keyed script (longest matching key
//! wins); unmatched prompts yield the fixed sentinel `MOCK-UNMATCHED` so
//! tests fail loudly. Images are solid-color PNG placeholders derived
//! from the prompt hash, seed, and variant index, making image sets
//! byte-deterministic for a fixed seed.

use std::collections::BTreeMap;
use std::io::Cursor;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::sync::Semaphore;

use super::{
    BackendError, ChatRequest, ChatResponse, GeneratedImage, ImageRequest, ImageResult,
    InferenceBackend,
};

/// Reply for prompts no script entry matches.
pub const UNMATCHED_SENTINEL: &str = "MOCK-UNMATCHED";

/// Substring-keyed canned responses plus failure triggers.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MockScript {
    /// Prompt substring -> canned reply. Longest matching key wins.
    #[serde(default)]
    pub responses: BTreeMap<String, String>,
    /// Prompts containing any of these substrings fail with a scripted
    /// transport error.
    #[serde(default)]
    pub failures: Vec<String>,
}

impl MockScript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<K, V>(pairs: impl IntoIterator<Item = (K, V)>) -> Self
    where
        K: Into<String>,
        V: Into<String>,
    {
        let mut script = MockScript::new();
        for (k, v) in pairs {
            script.insert(k, v);
        }
        script
    }

    pub fn insert(&mut self, key: impl Into<String>, reply: impl Into<String>) -> &mut Self {
        let key = key.into();
        assert!(!key.is_empty(), "mock script keys must not be empty");
        self.responses.insert(key, reply.into());
        self
    }

    pub fn fail_on(&mut self, key: impl Into<String>) -> &mut Self {
        self.failures.push(key.into());
        self
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path).map_err(|e| BackendError::InvalidConfig {
            detail: format!("failed to read mock script {}: {e}", path.display()),
        })?;
        serde_json::from_str(&text).map_err(|e| BackendError::InvalidConfig {
            detail: format!("failed to parse mock script {}: {e}", path.display()),
        })
    }

    fn is_failure(&self, prompt: &str) -> bool {
        self.failures.iter().any(|f| prompt.contains(f))
    }

    /// Longest matching key wins; equal lengths break on lexicographic
    /// key order via the underlying sorted map.
    fn reply(&self, prompt: &str) -> String {
        self.responses
            .iter()
            .filter(|(key, _)| prompt.contains(key.as_str()))
            .max_by_key(|(key, _)| key.len())
            .map(|(_, reply)| reply.clone())
            .unwrap_or_else(|| UNMATCHED_SENTINEL.to_string())
    }
}

/// In-memory deterministic backend with call accounting.
pub struct MockBackend {
    name: String,
    model_id: String,
    script: MockScript,
    latency: Duration,
    limiter: Arc<Semaphore>,
    calls: Arc<AtomicUsize>,
    in_flight: Arc<AtomicUsize>,
    max_in_flight: Arc<AtomicUsize>,
}

impl MockBackend {
    pub fn new(name: impl Into<String>, model_id: impl Into<String>, script: MockScript) -> Self {
        MockBackend {
            name: name.into(),
            model_id: model_id.into(),
            script,
            latency: Duration::ZERO,
            limiter: Arc::new(Semaphore::new(usize::MAX >> 3)),
            calls: Arc::new(AtomicUsize::new(0)),
            in_flight: Arc::new(AtomicUsize::new(0)),
            max_in_flight: Arc::new(AtomicUsize::new(0)),
        }
    }

    /// Limit concurrent admissions, mirroring the HTTP backend contract.
    pub fn with_concurrency_limit(mut self, max_concurrent: usize) -> Self {
        self.limiter = Arc::new(Semaphore::new(max_concurrent.max(1)));
        self
    }

    /// Simulate processing time, to exercise concurrency behavior.
    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = latency;
        self
    }

    /// Total chat + image calls served so far.
    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Highest number of simultaneously admitted requests observed.
    pub fn max_in_flight(&self) -> usize {
        self.max_in_flight.load(Ordering::SeqCst)
    }

    /// Shared call counter, for asserting across handle clones.
    pub fn call_counter(&self) -> Arc<AtomicUsize> {
        self.calls.clone()
    }

    async fn admit(&self) -> AdmissionGuard<'_> {
        let permit = self
            .limiter
            .acquire()
            .await
            .expect("mock limiter closed");
        self.calls.fetch_add(1, Ordering::SeqCst);
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.max_in_flight.fetch_max(now, Ordering::SeqCst);
        if !self.latency.is_zero() {
            tokio::time::sleep(self.latency).await;
        }
        AdmissionGuard {
            in_flight: &self.in_flight,
            _permit: permit,
        }
    }

    fn scripted_failure(&self, prompt: &str) -> Option<BackendError> {
        self.script.is_failure(prompt).then(|| BackendError::Unreachable {
            backend: self.name.clone(),
            attempts: 1,
            detail: "scripted failure".into(),
        })
    }
}

struct AdmissionGuard<'a> {
    in_flight: &'a AtomicUsize,
    _permit: tokio::sync::SemaphorePermit<'a>,
}

impl Drop for AdmissionGuard<'_> {
    fn drop(&mut self) {
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
    }
}

/// Solid-color PNG derived from prompt hash, seed, and variant index.
fn placeholder_png(prompt: &str, seed: u64, variant_index: u32, width: u32, height: u32) -> Vec<u8> {
    let mut hasher = Sha256::new();
    hasher.update(prompt.as_bytes());
    hasher.update(seed.to_le_bytes());
    hasher.update(variant_index.to_le_bytes());
    let digest = hasher.finalize();
    let pixel = image::Rgb([digest[0], digest[1], digest[2]]);
    let img = image::RgbImage::from_pixel(width, height, pixel);
    let mut bytes = Vec::new();
    img.write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
        .expect("in-memory PNG encoding cannot fail");
    bytes
}

#[async_trait]
impl InferenceBackend for MockBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn model_id(&self) -> &str {
        &self.model_id
    }

    async fn complete_chat(&self, req: &ChatRequest) -> Result<ChatResponse, BackendError> {
        req.validate()?;
        let _guard = self.admit().await;
        if let Some(err) = self.scripted_failure(&req.prompt) {
            return Err(err);
        }
        Ok(ChatResponse {
            text: self.script.reply(&req.prompt).trim_end().to_string(),
            usage: None,
            latency: self.latency,
            backend_name: self.name.clone(),
            model_id: req.model_id.clone(),
            attempts: 1,
        })
    }

    async fn generate_images(&self, req: &ImageRequest) -> Result<ImageResult, BackendError> {
        req.validate()?;
        let _guard = self.admit().await;
        if let Some(err) = self.scripted_failure(&req.prompt) {
            return Err(err);
        }
        let seed = req.seed.unwrap_or(0);
        let images = (0..req.variant_count)
            .map(|i| GeneratedImage {
                variant_index: i,
                bytes: placeholder_png(&req.prompt, seed, i, req.width, req.height),
                format: "png".to_string(),
            })
            .collect();
        Ok(ImageResult {
            images,
            latency: self.latency,
            attempts: 1,
        })
    }
}
