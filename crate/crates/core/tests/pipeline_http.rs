//! Full pipeline over the HTTP backend against a local OpenAI-compatible
//! mock server: proves the transport, retry accounting, and image
//! decoding work end to end, not just against the in-process mock.

mod common;

use std::io::Cursor;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;
use std::time::Duration;

use base64::Engine;
use serde_json::json;
use wiremock::matchers::{method, path};
use wiremock::{Mock, MockServer, Request, Respond, ResponseTemplate};

use common::{test_config, test_document};
use stadtbild_core::backend::{BackendConfig, HttpBackend, InferenceBackend};
use stadtbild_core::corpus::SourceKind;
use stadtbild_core::pipeline::{self, PipelineBackends, StageSetup, StageStatus};

/// Routes chat requests by prompt substring, longest key first.
struct ChatScript {
    entries: Vec<(&'static str, &'static str)>,
    /// Every Nth request fails with 503 when set, to exercise retries.
    fail_every: Option<u32>,
    counter: AtomicU32,
}

impl Respond for ChatScript {
    fn respond(&self, request: &Request) -> ResponseTemplate {
        if let Some(n) = self.fail_every {
            let seq = self.counter.fetch_add(1, Ordering::SeqCst);
            if seq % n == 0 {
                return ResponseTemplate::new(503);
            }
        }
        let body: serde_json::Value = serde_json::from_slice(&request.body).unwrap();
        let prompt = body["messages"][0]["content"].as_str().unwrap_or_default();
        let reply = self
            .entries
            .iter()
            .filter(|(key, _)| prompt.contains(key))
            .max_by_key(|(key, _)| key.len())
            .map(|(_, reply)| *reply)
            .unwrap_or("SERVER-UNMATCHED");
        ResponseTemplate::new(200).set_body_json(json!({
            "choices": [{"message": {"role": "assistant", "content": reply}}],
            "usage": {"prompt_tokens": 10, "completion_tokens": 10}
        }))
    }
}

/// Returns `n` solid-color PNGs as base64, as the images endpoint would.
struct ImagesEndpoint;

impl Respond for ImagesEndpoint {
    fn respond(&self, request: &Request) -> ResponseTemplate {
        let body: serde_json::Value = serde_json::from_slice(&request.body).unwrap();
        let n = body["n"].as_u64().unwrap_or(1);
        let seed = body["seed"].as_u64().unwrap_or(0);
        let data: Vec<serde_json::Value> = (0..n)
            .map(|i| {
                let shade = ((seed + i) % 256) as u8;
                let img = image::RgbImage::from_pixel(8, 8, image::Rgb([shade, 64, 128]));
                let mut bytes = Vec::new();
                img.write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
                    .unwrap();
                json!({"b64_json": base64::engine::general_purpose::STANDARD.encode(bytes)})
            })
            .collect();
        ResponseTemplate::new(200).set_body_json(json!({ "data": data }))
    }
}

fn script_entries() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "Translate the following sentences from German into English",
            common::ENGLISH_TEXT,
        ),
        ("Summarize the following political program", common::SUMMARY_TEXT),
        (
            "Identify five important visual aspects",
            "<think>The program focuses on cycling and greening measures.</think>\
             Expanded Urban Green Spaces, Safer Bicycle Lane Network, \
             Renovated Modern School Buildings, Clean Efficient Public Transport, \
             Lively Central Market Squares",
        ),
        (
            "Translate the following sentences from English into German: The program focuses",
            common::THINK_DE,
        ),
        ("Expanded Urban Green Spaces", common::DESCRIPTORS_DE),
    ]
}

async fn start_server(fail_every: Option<u32>) -> MockServer {
    let server = MockServer::start().await;
    Mock::given(method("POST"))
        .and(path("/v1/chat/completions"))
        .respond_with(ChatScript {
            entries: script_entries(),
            fail_every,
            counter: AtomicU32::new(1),
        })
        .mount(&server)
        .await;
    Mock::given(method("POST"))
        .and(path("/v1/images/generations"))
        .respond_with(ImagesEndpoint)
        .mount(&server)
        .await;
    server
}

fn http_backends(base_url: &str, max_retries: u32) -> PipelineBackends {
    let setup = |name: &str, watts: f64| {
        let backend = HttpBackend::new(BackendConfig {
            name: name.into(),
            base_url: base_url.into(),
            model_id: format!("{name}-model"),
            timeout: Duration::from_secs(5),
            max_retries,
            retry_backoff_base: Duration::from_millis(1),
            max_concurrent_requests: 4,
            api_key: None,
        })
        .unwrap();
        StageSetup {
            backend: Arc::new(backend) as Arc<dyn InferenceBackend>,
            avg_power_w: watts,
            max_output_tokens: 512,
            dedicated_summarizer: false,
            supports_seed: true,
        }
    };
    PipelineBackends {
        translate_de_en: setup("t-de-en", 322.58),
        summarize: setup("summarizer", 238.10),
        reason: setup("reasoner", 234.84),
        translate_en_de: setup("t-en-de", 316.46),
        image_gen: setup("imager", 320.71),
    }
}

#[tokio::test]
async fn pipeline_completes_over_http() {
    let server = start_server(None).await;
    let dir = tempfile::tempdir().unwrap();
    let cfg = test_config(dir.path());
    let backends = http_backends(&server.uri(), 2);
    let docs = vec![
        test_document("alpha", SourceKind::Program),
        test_document("alpha", SourceKind::CompassResponses),
    ];

    let manifest = pipeline::run_all(&docs, &backends, &cfg, "corpus")
        .await
        .unwrap();
    assert_eq!(manifest.stage_records.len(), 10);
    assert!(manifest
        .stage_records
        .iter()
        .all(|r| r.status == StageStatus::Ok));
    assert_eq!(manifest.image_artifacts().count(), 10);
    manifest.verify_dataflow().unwrap();

    let outcome = &manifest.documents[0];
    assert_eq!(outcome.english_descriptors.len(), 5);
    assert_eq!(outcome.german_descriptors.len(), 5);
    assert_eq!(outcome.german_reasoning.as_deref(), Some(common::THINK_DE));
}

#[tokio::test]
async fn intermittent_server_errors_are_absorbed_by_retries() {
    // Every 4th chat request answers 503; with retries enabled the run
    // still completes, and the extra attempts surface in the records.
    let server = start_server(Some(4)).await;
    let dir = tempfile::tempdir().unwrap();
    let cfg = test_config(dir.path());
    let backends = http_backends(&server.uri(), 3);
    let docs = vec![test_document("alpha", SourceKind::Program)];

    let manifest = pipeline::run_all(&docs, &backends, &cfg, "corpus")
        .await
        .unwrap();
    assert!(manifest
        .stage_records
        .iter()
        .all(|r| r.status == StageStatus::Ok));
    let total_attempts: u32 = manifest.stage_records.iter().map(|r| r.attempts).sum();
    let chat_calls = 4; // translate + summarize + reason + 2 back-translations, minus image stage
    assert!(
        total_attempts > chat_calls,
        "retries must be visible in attempt counts, got {total_attempts}"
    );
}

#[tokio::test]
async fn persistent_server_failure_marks_stage_failed() {
    let server = MockServer::start().await;
    Mock::given(method("POST"))
        .and(path("/v1/chat/completions"))
        .respond_with(ResponseTemplate::new(500))
        .mount(&server)
        .await;
    let dir = tempfile::tempdir().unwrap();
    let cfg = test_config(dir.path());
    let backends = http_backends(&server.uri(), 1);
    let docs = vec![test_document("alpha", SourceKind::Program)];

    let manifest = pipeline::run_all(&docs, &backends, &cfg, "corpus")
        .await
        .unwrap();
    let records = manifest.records_for("alpha", SourceKind::Program);
    assert_eq!(records[0].status, StageStatus::Failed);
    assert_eq!(records[0].attempts, 2, "max_retries 1 means two attempts");
    assert!(records[1..]
        .iter()
        .all(|r| r.status == StageStatus::Skipped));
}
