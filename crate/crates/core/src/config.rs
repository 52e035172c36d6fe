//! Run configuration and corpus descriptor loading.
//!
//! Configuration lives in a single TOML file; secrets are read from the
//! environment only ({BACKEND_NAME}_API_KEY). The configuration hash used
//! for resume staleness covers every field that influences pipeline
//! outputs, so cosmetic changes (output directory, parallelism) do not
//! invalidate cached stages.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::BackendConfig;
use crate::corpus::{load_document, CorpusError, Document, SourceKind};
use crate::stage::StageKind;
use crate::telemetry::EmissionsConfig;

pub const DEFAULT_CHUNK_SIZE: usize = 10;
pub const DEFAULT_VARIANT_COUNT: u32 = 5;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("invalid config: {detail}")]
    Invalid { detail: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Connection settings for one stage's backend.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageBackendConfig {
    pub name: String,
    pub base_url: String,
    pub model_id: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub retry_backoff_base_ms: u64,
    #[serde(default = "default_max_concurrent")]
    pub max_concurrent_requests: usize,
    /// Configured average draw while this backend works, in watts.
    #[serde(default)]
    pub avg_power_w: f64,
    /// The summarization service takes raw text instead of a chat
    /// instruction (only meaningful on the summarize stage).
    #[serde(default)]
    pub dedicated_summarizer: bool,
    /// Pass the seed field on image requests.
    #[serde(default)]
    pub supports_seed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_output_tokens: Option<u32>,
}

fn default_timeout_secs() -> f64 {
    120.0
}
fn default_max_retries() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    500
}
fn default_max_concurrent() -> usize {
    2
}

impl StageBackendConfig {
    /// Expand into a transport config, picking up the API key from the
    /// environment.
    pub fn to_backend_config(&self) -> BackendConfig {
        BackendConfig {
            name: self.name.clone(),
            base_url: self.base_url.clone(),
            model_id: self.model_id.clone(),
            timeout: Duration::from_secs_f64(self.timeout_secs),
            max_retries: self.max_retries,
            retry_backoff_base: Duration::from_millis(self.retry_backoff_base_ms),
            max_concurrent_requests: self.max_concurrent_requests,
            api_key: std::env::var(BackendConfig::api_key_env_var(&self.name)).ok(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageBackendTable {
    pub translate_de_en: StageBackendConfig,
    pub summarize: StageBackendConfig,
    pub reason: StageBackendConfig,
    pub translate_en_de: StageBackendConfig,
    pub image_gen: StageBackendConfig,
}

impl StageBackendTable {
    pub fn for_stage(&self, stage: StageKind) -> &StageBackendConfig {
        match stage {
            StageKind::TranslateDeEn => &self.translate_de_en,
            StageKind::Summarize => &self.summarize,
            StageKind::Reason => &self.reason,
            StageKind::TranslateEnDe => &self.translate_en_de,
            StageKind::ImageGen => &self.image_gen,
        }
    }
}

/// Complete configuration of one pipeline run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Corpus descriptor path, resolved relative to the config file.
    pub corpus: PathBuf,
    pub out_dir: PathBuf,
    #[serde(default = "default_chunk_size")]
    pub chunk_size: usize,
    #[serde(default = "default_variant_count")]
    pub variant_count: u32,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_max_parallel")]
    pub max_parallel_documents: usize,
    #[serde(default)]
    pub strict_mode: bool,
    /// Automatic re-prompts when the reasoning output violates the
    /// descriptor contract (0 to 2).
    #[serde(default = "default_retry_on_violation")]
    pub retry_on_violation: u32,
    #[serde(default = "default_city")]
    pub city_name: String,
    #[serde(default = "default_image_dim")]
    pub image_width: u32,
    #[serde(default = "default_image_dim")]
    pub image_height: u32,
    #[serde(default = "default_max_output_tokens")]
    pub max_output_tokens: u32,
    #[serde(default)]
    pub emissions: EmissionsConfig,
    pub backends: StageBackendTable,
    /// Mock script used by `--mock` runs, resolved relative to the
    /// config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_script: Option<PathBuf>,
}

fn default_chunk_size() -> usize {
    DEFAULT_CHUNK_SIZE
}
fn default_variant_count() -> u32 {
    DEFAULT_VARIANT_COUNT
}
fn default_max_parallel() -> usize {
    2
}
fn default_retry_on_violation() -> u32 {
    1
}
fn default_city() -> String {
    crate::prompts::DEFAULT_CITY.to_string()
}
fn default_image_dim() -> u32 {
    1024
}
fn default_max_output_tokens() -> u32 {
    2048
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self, ConfigError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: display.clone(),
            source: e,
        })?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: display,
            detail: e.to_string(),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.corpus = base.join(&cfg.corpus);
        cfg.out_dir = base.join(&cfg.out_dir);
        if let Some(script) = cfg.mock_script.take() {
            cfg.mock_script = Some(base.join(script));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.chunk_size == 0 {
            return Err(ConfigError::Invalid {
                detail: "chunk_size must be >= 1".into(),
            });
        }
        if self.variant_count == 0 {
            return Err(ConfigError::Invalid {
                detail: "variant_count must be >= 1".into(),
            });
        }
        if self.max_parallel_documents == 0 {
            return Err(ConfigError::Invalid {
                detail: "max_parallel_documents must be >= 1".into(),
            });
        }
        if self.retry_on_violation > 2 {
            return Err(ConfigError::Invalid {
                detail: "retry_on_violation must be in 0..=2".into(),
            });
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err(ConfigError::Invalid {
                detail: "image dimensions must be positive".into(),
            });
        }
        self.emissions.validate().map_err(|e| ConfigError::Invalid {
            detail: e.to_string(),
        })?;
        for stage in StageKind::ALL {
            let be = self.backends.for_stage(stage);
            be.to_backend_config()
                .validate()
                .map_err(|e| ConfigError::Invalid {
                    detail: format!("backend for {stage}: {e}"),
                })?;
        }
        Ok(())
    }

    /// Canonical hash over every output-influencing field. Excludes paths
    /// and parallelism; includes the mock script content when configured.
    pub fn fingerprint(&self) -> String {
        let mut fields: BTreeMap<&str, serde_json::Value> = BTreeMap::new();
        fields.insert("chunk_size", self.chunk_size.into());
        fields.insert("variant_count", self.variant_count.into());
        fields.insert("base_seed", self.base_seed.into());
        fields.insert("strict_mode", self.strict_mode.into());
        fields.insert("retry_on_violation", self.retry_on_violation.into());
        fields.insert("city_name", self.city_name.clone().into());
        fields.insert("image_width", self.image_width.into());
        fields.insert("image_height", self.image_height.into());
        fields.insert("max_output_tokens", self.max_output_tokens.into());
        fields.insert(
            "emissions",
            serde_json::to_value(self.emissions).expect("emissions config serializes"),
        );
        let mut backends = BTreeMap::new();
        for stage in StageKind::ALL {
            backends.insert(
                stage.label(),
                serde_json::to_value(self.backends.for_stage(stage))
                    .expect("backend config serializes"),
            );
        }
        fields.insert(
            "backends",
            serde_json::to_value(backends).expect("map serializes"),
        );
        if let Some(script) = &self.mock_script {
            let content = std::fs::read(script).unwrap_or_default();
            fields.insert(
                "mock_script_sha256",
                hex::encode(Sha256::digest(&content)).into(),
            );
        }
        let canonical =
            serde_json::to_vec(&fields).expect("canonical config json serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

/// One party entry in the corpus descriptor.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartyEntry {
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compass: Option<PathBuf>,
}

/// The corpus descriptor: party id -> display name and source files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusDescriptor {
    #[serde(rename = "party")]
    pub parties: Vec<PartyEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
    #[serde(skip)]
    pub content_hash: String,
}

impl CorpusDescriptor {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let display = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|e| ConfigError::Io {
            path: display.clone(),
            source: e,
        })?;
        let text = String::from_utf8(bytes.clone()).map_err(|e| ConfigError::Parse {
            path: display.clone(),
            detail: e.to_string(),
        })?;
        let mut descriptor: CorpusDescriptor =
            toml::from_str(&text).map_err(|e| ConfigError::Parse {
                path: display.clone(),
                detail: e.to_string(),
            })?;
        if descriptor.parties.is_empty() {
            return Err(ConfigError::Invalid {
                detail: format!("corpus descriptor {display} lists no parties"),
            });
        }
        descriptor.base_dir = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
        descriptor.content_hash = hex::encode(Sha256::digest(&bytes));
        Ok(descriptor)
    }

    /// Load every referenced document. Paths resolve relative to the
    /// descriptor file.
    pub fn load_documents(&self) -> Result<Vec<Document>, CorpusError> {
        let mut documents = Vec::new();
        for party in &self.parties {
            if let Some(program) = &party.program {
                documents.push(load_document(
                    &self.base_dir.join(program),
                    &party.id,
                    &party.name,
                    SourceKind::Program,
                )?);
            }
            if let Some(compass) = &party.compass {
                documents.push(load_document(
                    &self.base_dir.join(compass),
                    &party.id,
                    &party.name,
                    SourceKind::CompassResponses,
                )?);
            }
        }
        Ok(documents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn sample_config_toml() -> String {
        let backend = |name: &str| {
            format!(
                "[backends.{name}]\nname = \"{name}\"\nbase_url = \"http://127.0.0.1:8000\"\nmodel_id = \"m-{name}\"\navg_power_w = 300.0\n"
            )
        };
        format!(
            "corpus = \"corpus.toml\"\nout_dir = \"out\"\n{}{}{}{}{}",
            backend("translate_de_en"),
            backend("summarize"),
            backend("reason"),
            backend("translate_en_de"),
            backend("image_gen"),
        )
    }

    #[test]
    fn defaults_follow_the_standard_values() {
        let dir = tempdir();
        let path = dir.join("run.toml");
        std::fs::write(&path, sample_config_toml()).unwrap();
        let cfg = RunConfig::from_toml_file(&path).unwrap();
        assert_eq!(cfg.chunk_size, 10);
        assert_eq!(cfg.variant_count, 5);
        assert_eq!(cfg.max_parallel_documents, 2);
        assert_eq!(cfg.city_name, "Dortmund");
        assert!(!cfg.strict_mode);
        assert_eq!(cfg.emissions.carbon_intensity_kg_per_kwh, 0.380);
        assert_eq!(cfg.emissions.underestimation_correction, 1.0);
    }

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        let dir = tempdir();
        let path = dir.join("run.toml");
        std::fs::write(&path, sample_config_toml()).unwrap();
        let cfg = RunConfig::from_toml_file(&path).unwrap();
        assert_eq!(cfg.fingerprint(), cfg.fingerprint());

        let mut changed = cfg.clone();
        changed.chunk_size = 7;
        assert_ne!(cfg.fingerprint(), changed.fingerprint());

        // Paths and parallelism do not affect the fingerprint.
        let mut moved = cfg.clone();
        moved.out_dir = PathBuf::from("/elsewhere");
        moved.max_parallel_documents = 9;
        assert_eq!(cfg.fingerprint(), moved.fingerprint());
    }

    #[test]
    fn corpus_descriptor_round_trip() {
        let dir = tempdir();
        std::fs::write(dir.join("a_program.txt"), "Wir fordern mehr Radwege.").unwrap();
        std::fs::write(dir.join("a_compass.txt"), "Zustimmung zu Frage eins.").unwrap();
        let descriptor_path = dir.join("corpus.toml");
        let mut f = std::fs::File::create(&descriptor_path).unwrap();
        writeln!(
            f,
            "[[party]]\nid = \"alpha\"\nname = \"Partei Alpha\"\nprogram = \"a_program.txt\"\ncompass = \"a_compass.txt\""
        )
        .unwrap();
        drop(f);

        let descriptor = CorpusDescriptor::load(&descriptor_path).unwrap();
        assert_eq!(descriptor.parties.len(), 1);
        assert!(!descriptor.content_hash.is_empty());
        let documents = descriptor.load_documents().unwrap();
        assert_eq!(documents.len(), 2);
        assert_eq!(documents[0].source_kind, SourceKind::Program);
        assert_eq!(documents[1].source_kind, SourceKind::CompassResponses);
    }

    #[test]
    fn missing_document_file_is_reported() {
        let dir = tempdir();
        let descriptor_path = dir.join("corpus.toml");
        std::fs::write(
            &descriptor_path,
            "[[party]]\nid = \"a\"\nname = \"A\"\nprogram = \"missing.txt\"\n",
        )
        .unwrap();
        let descriptor = CorpusDescriptor::load(&descriptor_path).unwrap();
        let err = descriptor.load_documents().unwrap_err();
        assert!(err.to_string().contains("missing.txt"));
    }

    fn tempdir() -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "stadtbild-config-test-{}",
            uuid::Uuid::new_v4()
        ));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }
}
