//! Shared fixtures for integration tests: scripted mock backends, run
//! configs pointing at temp directories, and synthetic corpora.

use std::path::Path;
use std::sync::Arc;

use stadtbild_core::backend::{InferenceBackend, MockBackend, MockScript};
use stadtbild_core::config::{RunConfig, StageBackendConfig, StageBackendTable};
use stadtbild_core::corpus::{Document, SourceKind};
use stadtbild_core::pipeline::{PipelineBackends, StageSetup};
use stadtbild_core::telemetry::EmissionsConfig;

pub const ENGLISH_TEXT: &str =
    "The party demands better cycling infrastructure and greener public spaces.";
pub const SUMMARY_TEXT: &str = "A greener, bike-friendly city with modern schools.";
pub const THINK_TEXT: &str = "The program focuses on cycling and greening measures.";
pub const DESCRIPTORS_EN: &str = "Expanded Urban Green Spaces, Safer Bicycle Lane Network, \
     Renovated Modern School Buildings, Clean Efficient Public Transport, \
     Lively Central Market Squares";
pub const DESCRIPTORS_DE: &str = "Erweiterte Grünflächen, Sicheres Radwegenetz, \
     Sanierte Schulgebäude, Sauberer Nahverkehr, Lebendige Marktplätze";
pub const THINK_DE: &str = "Das Programm konzentriert sich auf Radverkehr und Begrünung.";

/// Generic five-stage reply chain, independent of document content.
pub fn standard_script() -> MockScript {
    MockScript::from_pairs([
        (
            "Translate the following sentences from German into English",
            ENGLISH_TEXT,
        ),
        ("Summarize the following political program", SUMMARY_TEXT),
        (
            "Identify five important visual aspects",
            &format!("<think>{THINK_TEXT}</think>{DESCRIPTORS_EN}") as &str,
        ),
        (
            "Translate the following sentences from English into German: The program focuses",
            THINK_DE,
        ),
        ("Expanded Urban Green Spaces", DESCRIPTORS_DE),
    ])
}

/// One shared mock backend wired into all five stages, with measured-style
/// per-stage power figures.
pub fn mock_pipeline(script: MockScript) -> (PipelineBackends, Arc<MockBackend>) {
    let mock = Arc::new(MockBackend::new("mock", "mock-model", script));
    let setup = |watts: f64| StageSetup {
        backend: mock.clone() as Arc<dyn InferenceBackend>,
        avg_power_w: watts,
        max_output_tokens: 512,
        dedicated_summarizer: false,
        supports_seed: true,
    };
    let backends = PipelineBackends {
        translate_de_en: setup(322.58),
        summarize: setup(238.10),
        reason: setup(234.84),
        translate_en_de: setup(316.46),
        image_gen: setup(320.71),
    };
    (backends, mock)
}

pub fn stage_backend(name: &str) -> StageBackendConfig {
    StageBackendConfig {
        name: name.to_string(),
        base_url: "http://127.0.0.1:1".to_string(),
        model_id: format!("mock-{name}"),
        timeout_secs: 5.0,
        max_retries: 1,
        retry_backoff_base_ms: 1,
        max_concurrent_requests: 4,
        avg_power_w: 300.0,
        dedicated_summarizer: false,
        supports_seed: true,
        max_output_tokens: None,
    }
}

pub fn test_config(out_dir: &Path) -> RunConfig {
    RunConfig {
        corpus: out_dir.join("corpus.toml"),
        out_dir: out_dir.to_path_buf(),
        chunk_size: 10,
        variant_count: 5,
        base_seed: 42,
        max_parallel_documents: 2,
        strict_mode: false,
        retry_on_violation: 1,
        city_name: "Dortmund".to_string(),
        image_width: 32,
        image_height: 32,
        max_output_tokens: 512,
        emissions: EmissionsConfig::default(),
        backends: StageBackendTable {
            translate_de_en: stage_backend("t-de-en"),
            summarize: stage_backend("summarizer"),
            reason: stage_backend("reasoner"),
            translate_en_de: stage_backend("t-en-de"),
            image_gen: stage_backend("imager"),
        },
        mock_script: None,
    }
}

pub fn test_document(party_id: &str, kind: SourceKind) -> Document {
    let body = match kind {
        SourceKind::Program => format!(
            "Die Partei {party_id} fordert mehr Radwege in der Stadt. Unsere Schulen sollen \
             saniert werden. Gemeinsam gestalten wir die Zukunft."
        ),
        SourceKind::CompassResponses => format!(
            "Die Partei {party_id} stimmt der Frage nach mehr Radwegen zu. Sie lehnt höhere \
             Parkgebühren ab. Der Schulsanierung stimmt sie zu."
        ),
    };
    Document::from_text(&body, party_id, &format!("Partei {party_id}"), kind, false).unwrap()
}

/// `n_parties` x (program + compass) documents.
pub fn corpus(n_parties: usize) -> Vec<Document> {
    let mut documents = Vec::new();
    for i in 0..n_parties {
        let id = format!("p{i:02}");
        documents.push(test_document(&id, SourceKind::Program));
        documents.push(test_document(&id, SourceKind::CompassResponses));
    }
    documents
}
