//! The run manifest: the complete, content-addressed record of one
//! pipeline run. The manifest serializes canonically (fixed field order,
//! sorted collections, pretty JSON) so that diffs and hashes are
//! reproducible; it is written atomically via temp file plus rename.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SourceKind;
use crate::parse::Violation;
use crate::stage::StageKind;
use crate::telemetry::{EmissionsConfig, EmissionsReport, EnergyRecord};

use super::store::ContentStore;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

/// Audit record of one stage execution for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: StageKind,
    pub party_id: String,
    pub source_kind: SourceKind,
    pub input_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_hash: Option<String>,
    pub prompt_version: u32,
    pub backend_name: String,
    pub model_id: String,
    pub attempts: u32,
    pub started_at: String,
    pub finished_at: String,
    pub duration_secs: f64,
    pub status: StageStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    TranslationEn,
    Summary,
    Reasoning,
    TranslationDe,
    Image,
}

/// Index entry mapping (party, source, kind, variant) to a stored file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub party_id: String,
    pub source_kind: SourceKind,
    pub kind: ArtifactKind,
    pub variant: u32,
    /// Path relative to the run directory.
    pub path: String,
    pub content_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentStatus {
    Ok,
    Failed,
}

/// Per-document results embedded in the manifest so that downstream
/// consumers (site emission, the data file) are pure functions of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentOutcome {
    pub party_id: String,
    pub party_name: String,
    pub source_kind: SourceKind,
    pub content_hash: String,
    pub status: DocumentStatus,
    pub english_descriptors: Vec<String>,
    pub german_descriptors: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub german_reasoning: Option<String>,
    pub violations: Vec<Violation>,
}

/// Settings snapshot that downstream consumers need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSettings {
    pub chunk_size: usize,
    pub variant_count: u32,
    pub base_seed: u64,
    pub city_name: String,
    pub strict_mode: bool,
    #[serde(default)]
    pub emissions: EmissionsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub run_id: String,
    pub created_at: String,
    pub corpus_hash: String,
    pub config_hash: String,
    pub settings: ManifestSettings,
    pub documents: Vec<DocumentOutcome>,
    pub stage_records: Vec<StageRecord>,
    pub artifacts: Vec<ArtifactEntry>,
    pub energy: Vec<EnergyRecord>,
    pub totals: EmissionsReport,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("failed to read manifest {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse manifest {path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("manifest integrity violated: {detail}")]
    Integrity { detail: String },
}

impl RunManifest {
    /// Sort all collections into canonical order: documents and records
    /// by (party, source, stage), artifacts by (party, source, kind,
    /// variant), energy by (scope, stage).
    pub fn canonicalize(&mut self) {
        self.documents
            .sort_by(|a, b| (&a.party_id, a.source_kind).cmp(&(&b.party_id, b.source_kind)));
        self.stage_records.sort_by(|a, b| {
            (&a.party_id, a.source_kind, a.stage.index())
                .cmp(&(&b.party_id, b.source_kind, b.stage.index()))
        });
        self.artifacts.sort_by(|a, b| {
            (&a.party_id, a.source_kind, a.kind, a.variant)
                .cmp(&(&b.party_id, b.source_kind, b.kind, b.variant))
        });
        self.energy.sort_by(|a, b| {
            (&a.scope, a.stage.index(), a.duration_min)
                .partial_cmp(&(&b.scope, b.stage.index(), b.duration_min))
                .expect("durations are finite")
        });
    }

    pub fn to_canonical_json(&self) -> String {
        let mut copy = self.clone();
        copy.canonicalize();
        serde_json::to_string_pretty(&copy).expect("manifest serializes")
    }

    /// Write atomically: serialize to a temp file in the same directory,
    /// then rename over the target.
    pub fn save(&self, path: &Path) -> Result<(), ManifestError> {
        let json = self.to_canonical_json();
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        std::fs::create_dir_all(dir).map_err(|e| ManifestError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let tmp = dir.join(format!(".manifest.tmp-{}", std::process::id()));
        std::fs::write(&tmp, json.as_bytes())
            .and_then(|()| std::fs::rename(&tmp, path))
            .map_err(|e| ManifestError::Io {
                path: path.display().to_string(),
                source: e,
            })
    }

    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ManifestError::Io {
            path: display.clone(),
            source: e,
        })?;
        let manifest: RunManifest =
            serde_json::from_str(&text).map_err(|e| ManifestError::Parse {
                path: display.clone(),
                detail: e.to_string(),
            })?;
        if manifest.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(ManifestError::Parse {
                path: display,
                detail: format!(
                    "unsupported schema version {} (expected {MANIFEST_SCHEMA_VERSION})",
                    manifest.schema_version
                ),
            });
        }
        Ok(manifest)
    }

    pub fn image_artifacts(&self) -> impl Iterator<Item = &ArtifactEntry> {
        self.artifacts.iter().filter(|a| a.kind == ArtifactKind::Image)
    }

    pub fn records_for(
        &self,
        party_id: &str,
        source_kind: SourceKind,
    ) -> Vec<&StageRecord> {
        let mut records: Vec<&StageRecord> = self
            .stage_records
            .iter()
            .filter(|r| r.party_id == party_id && r.source_kind == source_kind)
            .collect();
        records.sort_by_key(|r| r.stage.index());
        records
    }

    /// Verify that every indexed artifact exists and re-hashes to its
    /// recorded content hash.
    pub fn verify_artifacts(&self, store: &ContentStore) -> Result<(), ManifestError> {
        for artifact in &self.artifacts {
            store
                .verify(&artifact.path, &artifact.content_hash)
                .map_err(|e| ManifestError::Integrity {
                    detail: e.to_string(),
                })?;
        }
        Ok(())
    }

    /// Verify the input/output hash chain of every document's Ok stages.
    pub fn verify_dataflow(&self) -> Result<(), ManifestError> {
        for doc in &self.documents {
            let records = self.records_for(&doc.party_id, doc.source_kind);
            let mut expected = doc.content_hash.clone();
            for record in records {
                if record.status != StageStatus::Ok {
                    break;
                }
                if record.input_hash != expected {
                    return Err(ManifestError::Integrity {
                        detail: format!(
                            "{}/{} stage {} input hash {} does not chain from {}",
                            doc.party_id,
                            doc.source_kind,
                            record.stage,
                            record.input_hash,
                            expected
                        ),
                    });
                }
                match &record.output_hash {
                    Some(hash) => expected = hash.clone(),
                    None => {
                        return Err(ManifestError::Integrity {
                            detail: format!(
                                "{}/{} stage {} is Ok but has no output hash",
                                doc.party_id, doc.source_kind, record.stage
                            ),
                        })
                    }
                }
            }
        }
        Ok(())
    }
}
