//! Five-stage document pipeline: translate, summarize, reason, translate
//! back, generate images. Stages run strictly in order per document;
//! documents run with bounded parallelism. Every intermediate artifact is
//! written to the content store before the next stage starts, and the run
//! manifest records the full input/output hash chain, enabling resume.

mod manifest;
mod store;

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use chrono::{SecondsFormat, Utc};
use futures::StreamExt;
use sha2::{Digest, Sha256};
use thiserror::Error;
use tracing::{info, warn};

use crate::backend::{BackendError, ChatRequest, ImageRequest, InferenceBackend};
use crate::config::RunConfig;
use crate::corpus::{chunk_sentences, segment_sentences, Document, SourceKind};
use crate::parse::{extract_think_block, parse_descriptor_list, DescriptorSet};
use crate::prompts::{
    render_image_prompt, render_reasoning_prompt, render_summarize_input,
    render_translation_prompt, template_for, SummarizerMode, TranslationDirection,
};
use crate::stage::StageKind;
use crate::telemetry::{render_report, EmissionsReport, EnergyLedger, EnergyRecord, ReportRow};

pub use manifest::{
    ArtifactEntry, ArtifactKind, DocumentOutcome, DocumentStatus, ManifestError,
    ManifestSettings, RunManifest, StageRecord, StageStatus, MANIFEST_FILE,
    MANIFEST_SCHEMA_VERSION,
};
pub use store::{ContentStore, StoreError, StoredArtifact, STORE_DIR};

/// Sampling temperature for all chat stages; pinned low for
/// reproducibility.
const TEMPERATURE: f32 = 0.0;

/// Backend handle plus per-stage execution settings.
#[derive(Clone)]
pub struct StageSetup {
    pub backend: Arc<dyn InferenceBackend>,
    pub avg_power_w: f64,
    pub max_output_tokens: u32,
    pub dedicated_summarizer: bool,
    pub supports_seed: bool,
}

/// One backend handle per stage.
#[derive(Clone)]
pub struct PipelineBackends {
    pub translate_de_en: StageSetup,
    pub summarize: StageSetup,
    pub reason: StageSetup,
    pub translate_en_de: StageSetup,
    pub image_gen: StageSetup,
}

impl PipelineBackends {
    pub fn for_stage(&self, stage: StageKind) -> &StageSetup {
        match stage {
            StageKind::TranslateDeEn => &self.translate_de_en,
            StageKind::Summarize => &self.summarize,
            StageKind::Reason => &self.reason,
            StageKind::TranslateEnDe => &self.translate_en_de,
            StageKind::ImageGen => &self.image_gen,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("duplicate document identity: {party_id}/{source_kind}")]
    DuplicateDocument {
        party_id: String,
        source_kind: SourceKind,
    },
    #[error("pipeline aborted: {0}")]
    Aborted(#[from] StoreError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("manifest is stale: {detail}")]
    ManifestStale { detail: String },
}

fn now_rfc3339() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true)
}

fn new_request_id() -> String {
    uuid::Uuid::new_v4().to_string()
}

/// Stage output hash: the content hash for single-artifact stages, the
/// hash of the concatenated part hashes for multi-artifact stages.
fn combined_hash(part_hashes: &[String]) -> String {
    let mut hasher = Sha256::new();
    for h in part_hashes {
        hasher.update(h.as_bytes());
    }
    hex::encode(hasher.finalize())
}

/// Result of running one document through all five stages.
struct DocumentRunResult {
    outcome: DocumentOutcome,
    records: Vec<StageRecord>,
    artifacts: Vec<ArtifactEntry>,
    energy: Vec<EnergyRecord>,
}

/// What a stage body produced: stored artifacts plus attempts made.
struct StageOutput {
    output_hash: String,
    artifacts: Vec<ArtifactEntry>,
    attempts: u32,
}

struct StageFailure {
    attempts: u32,
    detail: String,
}

/// Cached state from a previous manifest, consulted during resume.
struct ResumeContext<'a> {
    records: HashMap<(String, SourceKind, StageKind), &'a StageRecord>,
    artifacts: HashMap<(String, SourceKind, StageKind), Vec<&'a ArtifactEntry>>,
    energy: HashMap<(String, StageKind), &'a EnergyRecord>,
}

impl<'a> ResumeContext<'a> {
    fn from_manifest(manifest: &'a RunManifest) -> Self {
        let mut records = HashMap::new();
        for r in &manifest.stage_records {
            records.insert((r.party_id.clone(), r.source_kind, r.stage), r);
        }
        let mut artifacts: HashMap<_, Vec<&ArtifactEntry>> = HashMap::new();
        for a in &manifest.artifacts {
            let stage = match a.kind {
                ArtifactKind::TranslationEn => StageKind::TranslateDeEn,
                ArtifactKind::Summary => StageKind::Summarize,
                ArtifactKind::Reasoning => StageKind::Reason,
                ArtifactKind::TranslationDe => StageKind::TranslateEnDe,
                ArtifactKind::Image => StageKind::ImageGen,
            };
            artifacts
                .entry((a.party_id.clone(), a.source_kind, stage))
                .or_default()
                .push(a);
        }
        for list in artifacts.values_mut() {
            list.sort_by_key(|a| a.variant);
        }
        let mut energy = HashMap::new();
        for e in &manifest.energy {
            if let Some(scope) = &e.scope {
                energy.insert((scope.clone(), e.stage), e);
            }
        }
        ResumeContext {
            records,
            artifacts,
            energy,
        }
    }
}

/// Executes the five stages for one document, accumulating records,
/// artifacts, and energy rows.
struct DocumentExecutor<'a> {
    doc: &'a Document,
    backends: &'a PipelineBackends,
    cfg: &'a RunConfig,
    store: &'a ContentStore,
    resume: Option<&'a ResumeContext<'a>>,

    records: Vec<StageRecord>,
    artifacts: Vec<ArtifactEntry>,
    ledger: EnergyLedger,

    chain_hash: String,
    failed: bool,

    translated: Option<String>,
    summary: Option<String>,
    descriptors: Option<DescriptorSet>,
    think_block: Option<String>,
    german_think: Option<String>,
    german_descriptors: Vec<String>,
}

impl<'a> DocumentExecutor<'a> {
    fn new(
        doc: &'a Document,
        backends: &'a PipelineBackends,
        cfg: &'a RunConfig,
        store: &'a ContentStore,
        resume: Option<&'a ResumeContext<'a>>,
    ) -> Self {
        DocumentExecutor {
            doc,
            backends,
            cfg,
            store,
            resume,
            records: Vec::new(),
            artifacts: Vec::new(),
            ledger: EnergyLedger::new(),
            chain_hash: doc.content_hash.clone(),
            failed: false,
            translated: None,
            summary: None,
            descriptors: None,
            think_block: None,
            german_think: None,
            german_descriptors: Vec::new(),
        }
    }

    fn scope(&self) -> String {
        format!("{}/{}", self.doc.party_id, self.doc.source_kind)
    }

    async fn run(mut self) -> Result<DocumentRunResult, PipelineError> {
        for stage in StageKind::ALL {
            self.run_stage(stage).await?;
        }
        let status = if self.failed {
            DocumentStatus::Failed
        } else {
            DocumentStatus::Ok
        };
        let (english, violations) = match &self.descriptors {
            Some(ds) => (ds.descriptors.clone(), ds.violations.clone()),
            None => (Vec::new(), Vec::new()),
        };
        Ok(DocumentRunResult {
            outcome: DocumentOutcome {
                party_id: self.doc.party_id.clone(),
                party_name: self.doc.party_name.clone(),
                source_kind: self.doc.source_kind,
                content_hash: self.doc.content_hash.clone(),
                status,
                english_descriptors: english,
                german_descriptors: self.german_descriptors,
                german_reasoning: self.german_think,
                violations,
            },
            records: self.records,
            artifacts: self.artifacts,
            energy: self.ledger.snapshot(),
        })
    }

    async fn run_stage(&mut self, stage: StageKind) -> Result<(), PipelineError> {
        if self.failed {
            self.push_skipped(stage);
            return Ok(());
        }
        if self.try_reuse(stage)? {
            return Ok(());
        }

        let setup = self.backends.for_stage(stage);
        let started_at = now_rfc3339();
        let started = Instant::now();
        let result = self.execute(stage).await?;
        let elapsed = started.elapsed();
        let finished_at = now_rfc3339();

        self.ledger.record_stage_scoped(
            stage,
            Some(self.scope()),
            elapsed,
            setup.avg_power_w,
            &self.cfg.emissions,
        );

        let mut record = StageRecord {
            stage,
            party_id: self.doc.party_id.clone(),
            source_kind: self.doc.source_kind,
            input_hash: self.chain_hash.clone(),
            output_hash: None,
            prompt_version: template_for(stage).version,
            backend_name: setup.backend.name().to_string(),
            model_id: setup.backend.model_id().to_string(),
            attempts: 0,
            started_at,
            finished_at,
            duration_secs: elapsed.as_secs_f64(),
            status: StageStatus::Ok,
            error: None,
        };
        match result {
            Ok(output) => {
                record.attempts = output.attempts;
                record.output_hash = Some(output.output_hash.clone());
                self.chain_hash = output.output_hash;
                self.artifacts.extend(output.artifacts);
            }
            Err(failure) => {
                warn!(
                    party = %self.doc.party_id,
                    source = %self.doc.source_kind,
                    %stage,
                    error = %failure.detail,
                    "stage failed"
                );
                record.attempts = failure.attempts;
                record.status = StageStatus::Failed;
                record.error = Some(failure.detail);
                self.failed = true;
            }
        }
        self.records.push(record);
        Ok(())
    }

    fn push_skipped(&mut self, stage: StageKind) {
        let setup = self.backends.for_stage(stage);
        let now = now_rfc3339();
        self.records.push(StageRecord {
            stage,
            party_id: self.doc.party_id.clone(),
            source_kind: self.doc.source_kind,
            input_hash: String::new(),
            output_hash: None,
            prompt_version: template_for(stage).version,
            backend_name: setup.backend.name().to_string(),
            model_id: setup.backend.model_id().to_string(),
            attempts: 0,
            started_at: now.clone(),
            finished_at: now,
            duration_secs: 0.0,
            status: StageStatus::Skipped,
            error: None,
        });
    }

    /// Reuse a cached Ok record whose input hash matches the current
    /// chain and whose artifacts still verify. Restores downstream state
    /// from the store.
    fn try_reuse(&mut self, stage: StageKind) -> Result<bool, PipelineError> {
        let Some(ctx) = self.resume else {
            return Ok(false);
        };
        let key = (self.doc.party_id.clone(), self.doc.source_kind, stage);
        let Some(&record) = ctx.records.get(&key) else {
            return Ok(false);
        };
        if record.status != StageStatus::Ok || record.input_hash != self.chain_hash {
            return Ok(false);
        }
        let artifacts: Vec<ArtifactEntry> = ctx
            .artifacts
            .get(&key)
            .map(|list| list.iter().map(|&a| a.clone()).collect())
            .unwrap_or_default();
        for artifact in &artifacts {
            if self.store.verify(&artifact.path, &artifact.content_hash).is_err() {
                return Ok(false);
            }
        }
        if !self.restore_state(stage, &artifacts) {
            return Ok(false);
        }

        self.chain_hash = record
            .output_hash
            .clone()
            .expect("Ok record has output hash");
        self.records.push(record.clone());
        self.artifacts.extend(artifacts);
        if let Some(&row) = ctx.energy.get(&(self.scope(), stage)) {
            self.ledger.append(row.clone());
        }
        Ok(true)
    }

    /// Load the cached stage outputs needed by later stages.
    fn restore_state(&mut self, stage: StageKind, artifacts: &[ArtifactEntry]) -> bool {
        let text_of = |kind: ArtifactKind, variant: u32| -> Option<String> {
            artifacts
                .iter()
                .find(|a| a.kind == kind && a.variant == variant)
                .and_then(|a| self.store.read_text(&a.path).ok())
        };
        match stage {
            StageKind::TranslateDeEn => {
                match text_of(ArtifactKind::TranslationEn, 0) {
                    Some(t) => self.translated = Some(t),
                    None => return false,
                }
            }
            StageKind::Summarize => match text_of(ArtifactKind::Summary, 0) {
                Some(t) => self.summary = Some(t),
                None => return false,
            },
            StageKind::Reason => match text_of(ArtifactKind::Reasoning, 0) {
                Some(full_text) => {
                    let raw = extract_think_block(&full_text);
                    match parse_descriptor_list(
                        &raw.answer_text,
                        &self.doc.party_id,
                        self.doc.source_kind,
                        self.cfg.strict_mode,
                    ) {
                        Ok(ds) => {
                            self.think_block = raw.think_block;
                            self.descriptors = Some(ds);
                        }
                        Err(_) => return false,
                    }
                }
                None => return false,
            },
            StageKind::TranslateEnDe => {
                match text_of(ArtifactKind::TranslationDe, 0) {
                    Some(list) => {
                        self.german_descriptors = split_items(&list);
                    }
                    None => return false,
                }
                self.german_think = text_of(ArtifactKind::TranslationDe, 1);
            }
            StageKind::ImageGen => {}
        }
        true
    }

    async fn execute(&mut self, stage: StageKind) -> Result<Result<StageOutput, StageFailure>, PipelineError> {
        match stage {
            StageKind::TranslateDeEn => self.execute_translate_de_en().await,
            StageKind::Summarize => self.execute_summarize().await,
            StageKind::Reason => self.execute_reason().await,
            StageKind::TranslateEnDe => self.execute_translate_en_de().await,
            StageKind::ImageGen => self.execute_image_gen().await,
        }
    }

    fn chat_request(&self, setup: &StageSetup, prompt: String) -> ChatRequest {
        ChatRequest {
            model_id: setup.backend.model_id().to_string(),
            prompt,
            temperature: TEMPERATURE,
            max_output_tokens: setup.max_output_tokens,
            request_id: new_request_id(),
        }
    }

    fn entry(&self, kind: ArtifactKind, variant: u32, art: &StoredArtifact, seed: Option<u64>) -> ArtifactEntry {
        ArtifactEntry {
            party_id: self.doc.party_id.clone(),
            source_kind: self.doc.source_kind,
            kind,
            variant,
            path: art.rel_path.clone(),
            content_hash: art.hash.clone(),
            seed,
        }
    }

    /// Translate each sentence chunk independently and join outputs in
    /// chunk order with single spaces.
    async fn execute_translate_de_en(
        &mut self,
    ) -> Result<Result<StageOutput, StageFailure>, PipelineError> {
        let setup = self.backends.for_stage(StageKind::TranslateDeEn);
        let spans = segment_sentences(self.doc);
        let chunks = chunk_sentences(&spans, self.cfg.chunk_size)
            .expect("chunk_size validated at config load");

        let calls = chunks.iter().map(|chunk| {
            let req = self.chat_request(
                setup,
                render_translation_prompt(TranslationDirection::DeEn, &chunk.text)
                    .expect("chunk text is non-empty"),
            );
            let backend = setup.backend.clone();
            async move { backend.complete_chat(&req).await }
        });
        let responses = futures::future::join_all(calls).await;

        let mut attempts = 0;
        let mut outputs = Vec::with_capacity(responses.len());
        let mut first_error: Option<BackendError> = None;
        for response in responses {
            match response {
                Ok(r) => {
                    attempts += r.attempts;
                    outputs.push(r.text);
                }
                Err(e) => {
                    attempts += e.attempts();
                    first_error.get_or_insert(e);
                }
            }
        }
        if let Some(e) = first_error {
            return Ok(Err(StageFailure {
                attempts,
                detail: e.to_string(),
            }));
        }
        let text = outputs.join(" ");
        let art = self.store.put_text(&text)?;
        self.translated = Some(text);
        Ok(Ok(StageOutput {
            output_hash: art.hash.clone(),
            artifacts: vec![self.entry(ArtifactKind::TranslationEn, 0, &art, None)],
            attempts,
        }))
    }

    async fn execute_summarize(
        &mut self,
    ) -> Result<Result<StageOutput, StageFailure>, PipelineError> {
        let setup = self.backends.for_stage(StageKind::Summarize);
        let mode = if setup.dedicated_summarizer {
            SummarizerMode::Dedicated
        } else {
            SummarizerMode::ChatInstruction
        };
        let translated = self.translated.as_deref().expect("stage order");
        let input = match render_summarize_input(translated, mode) {
            Ok(i) => i,
            Err(e) => {
                return Ok(Err(StageFailure {
                    attempts: 0,
                    detail: e.to_string(),
                }))
            }
        };
        match setup.backend.complete_chat(&self.chat_request(setup, input)).await {
            Ok(response) => {
                let art = self.store.put_text(&response.text)?;
                self.summary = Some(response.text);
                Ok(Ok(StageOutput {
                    output_hash: art.hash.clone(),
                    artifacts: vec![self.entry(ArtifactKind::Summary, 0, &art, None)],
                    attempts: response.attempts,
                }))
            }
            Err(e) => Ok(Err(StageFailure {
                attempts: e.attempts(),
                detail: e.to_string(),
            })),
        }
    }

    /// Run the reasoning prompt, split the chain-of-thought, and parse
    /// the descriptor list. Contract violations re-prompt up to the
    /// configured budget; in lenient mode the last output is accepted
    /// with its violations recorded.
    async fn execute_reason(
        &mut self,
    ) -> Result<Result<StageOutput, StageFailure>, PipelineError> {
        let setup = self.backends.for_stage(StageKind::Reason);
        let summary = self.summary.as_deref().expect("stage order");
        let prompt = match render_reasoning_prompt(summary) {
            Ok(p) => p,
            Err(e) => {
                return Ok(Err(StageFailure {
                    attempts: 0,
                    detail: e.to_string(),
                }))
            }
        };

        let rounds = 1 + self.cfg.retry_on_violation;
        let mut attempts = 0;
        let mut fallback: Option<(String, Option<String>, DescriptorSet)> = None;
        let mut last_failure: Option<String> = None;
        for _ in 0..rounds {
            let response = match setup
                .backend
                .complete_chat(&self.chat_request(setup, prompt.clone()))
                .await
            {
                Ok(r) => r,
                Err(e) => {
                    attempts += e.attempts();
                    return Ok(Err(StageFailure {
                        attempts,
                        detail: e.to_string(),
                    }));
                }
            };
            attempts += response.attempts;
            let raw = extract_think_block(&response.text);
            match parse_descriptor_list(
                &raw.answer_text,
                &self.doc.party_id,
                self.doc.source_kind,
                self.cfg.strict_mode,
            ) {
                Ok(ds) if ds.violations.is_empty() => {
                    return self
                        .accept_reasoning(response.text, raw.think_block, ds, attempts)
                        .map(Ok);
                }
                Ok(ds) => {
                    // Keep the violating output as fallback and re-prompt.
                    fallback = Some((response.text, raw.think_block, ds));
                }
                Err(e) => {
                    last_failure = Some(e.to_string());
                }
            }
        }
        if let Some((full_text, think, ds)) = fallback {
            return self.accept_reasoning(full_text, think, ds, attempts).map(Ok);
        }
        Ok(Err(StageFailure {
            attempts,
            detail: last_failure.unwrap_or_else(|| "reasoning produced no usable output".into()),
        }))
    }

    fn accept_reasoning(
        &mut self,
        full_text: String,
        think_block: Option<String>,
        descriptors: DescriptorSet,
        attempts: u32,
    ) -> Result<StageOutput, PipelineError> {
        let art = self.store.put_text(&full_text)?;
        self.think_block = think_block;
        self.descriptors = Some(descriptors);
        Ok(StageOutput {
            output_hash: art.hash.clone(),
            artifacts: vec![self.entry(ArtifactKind::Reasoning, 0, &art, None)],
            attempts,
        })
    }

    /// Translate the chain-of-thought and the descriptor list back to
    /// German. Stored as two parts: variant 0 the descriptor list,
    /// variant 1 the reasoning text (when present).
    async fn execute_translate_en_de(
        &mut self,
    ) -> Result<Result<StageOutput, StageFailure>, PipelineError> {
        let setup = self.backends.for_stage(StageKind::TranslateEnDe);
        let descriptors = self.descriptors.as_ref().expect("stage order");
        let mut attempts = 0;

        let list_text = descriptors.descriptors.join(", ");
        let list_prompt =
            match render_translation_prompt(TranslationDirection::EnDe, &list_text) {
                Ok(p) => p,
                Err(e) => {
                    return Ok(Err(StageFailure {
                        attempts: 0,
                        detail: e.to_string(),
                    }))
                }
            };
        let german_list = match setup
            .backend
            .complete_chat(&self.chat_request(setup, list_prompt))
            .await
        {
            Ok(r) => {
                attempts += r.attempts;
                r.text
            }
            Err(e) => {
                attempts += e.attempts();
                return Ok(Err(StageFailure {
                    attempts,
                    detail: e.to_string(),
                }));
            }
        };

        let mut german_think = None;
        if let Some(think) = self.think_block.as_deref() {
            if !think.trim().is_empty() {
                let prompt =
                    match render_translation_prompt(TranslationDirection::EnDe, think) {
                        Ok(p) => p,
                        Err(e) => {
                            return Ok(Err(StageFailure {
                                attempts,
                                detail: e.to_string(),
                            }))
                        }
                    };
                match setup.backend.complete_chat(&self.chat_request(setup, prompt)).await {
                    Ok(r) => {
                        attempts += r.attempts;
                        german_think = Some(r.text);
                    }
                    Err(e) => {
                        attempts += e.attempts();
                        return Ok(Err(StageFailure {
                            attempts,
                            detail: e.to_string(),
                        }));
                    }
                }
            }
        }

        let list_art = self.store.put_text(&german_list)?;
        let mut artifacts = vec![self.entry(ArtifactKind::TranslationDe, 0, &list_art, None)];
        let mut hashes = vec![list_art.hash.clone()];
        if let Some(think_de) = &german_think {
            let think_art = self.store.put_text(think_de)?;
            hashes.push(think_art.hash.clone());
            artifacts.push(self.entry(ArtifactKind::TranslationDe, 1, &think_art, None));
        }

        self.german_descriptors = split_items(&german_list);
        self.german_think = german_think;
        Ok(Ok(StageOutput {
            output_hash: combined_hash(&hashes),
            artifacts,
            attempts,
        }))
    }

    async fn execute_image_gen(
        &mut self,
    ) -> Result<Result<StageOutput, StageFailure>, PipelineError> {
        let setup = self.backends.for_stage(StageKind::ImageGen);
        let descriptors = self.descriptors.as_ref().expect("stage order");
        let prompt = match render_image_prompt(&self.cfg.city_name, descriptors) {
            Ok(p) => p,
            Err(e) => {
                return Ok(Err(StageFailure {
                    attempts: 0,
                    detail: e.to_string(),
                }))
            }
        };
        let request = ImageRequest {
            model_id: setup.backend.model_id().to_string(),
            prompt,
            variant_count: self.cfg.variant_count,
            width: self.cfg.image_width,
            height: self.cfg.image_height,
            seed: setup.supports_seed.then_some(self.cfg.base_seed),
        };
        match setup.backend.generate_images(&request).await {
            Ok(result) => {
                let mut artifacts = Vec::with_capacity(result.images.len());
                let mut hashes = Vec::with_capacity(result.images.len());
                for img in &result.images {
                    let art = self.store.put_image(&img.bytes)?;
                    let seed = setup
                        .supports_seed
                        .then(|| self.cfg.base_seed + u64::from(img.variant_index));
                    artifacts.push(self.entry(
                        ArtifactKind::Image,
                        img.variant_index,
                        &art,
                        seed,
                    ));
                    hashes.push(art.hash.clone());
                }
                Ok(Ok(StageOutput {
                    output_hash: combined_hash(&hashes),
                    artifacts,
                    attempts: result.attempts,
                }))
            }
            Err(e) => Ok(Err(StageFailure {
                attempts: e.attempts(),
                detail: e.to_string(),
            })),
        }
    }
}

/// Split a comma-separated list into trimmed, whitespace-collapsed
/// items, dropping a trailing period on the final item.
fn split_items(list: &str) -> Vec<String> {
    let mut items: Vec<String> = crate::parse::split_outside_parens(list)
        .into_iter()
        .map(|item| item.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|item| !item.is_empty())
        .collect();
    if let Some(last) = items.last_mut() {
        if let Some(stripped) = last.strip_suffix('.') {
            *last = stripped.to_string();
        }
        if last.is_empty() {
            items.pop();
        }
    }
    items
}

fn check_unique(documents: &[Document]) -> Result<(), PipelineError> {
    let mut seen = std::collections::HashSet::new();
    for doc in documents {
        if !seen.insert((doc.party_id.clone(), doc.source_kind)) {
            return Err(PipelineError::DuplicateDocument {
                party_id: doc.party_id.clone(),
                source_kind: doc.source_kind,
            });
        }
    }
    Ok(())
}

fn empty_report() -> EmissionsReport {
    EmissionsReport {
        rows: vec![],
        total: ReportRow {
            step: "Total".into(),
            duration_min: 0.0,
            avg_power_w: None,
            energy_kwh: 0.0,
            emissions_kg: 0.0,
        },
    }
}

async fn run_documents(
    documents: &[Document],
    backends: &PipelineBackends,
    cfg: &RunConfig,
    corpus_hash: &str,
    resume: Option<(&RunManifest, &ResumeContext<'_>)>,
) -> Result<RunManifest, PipelineError> {
    if documents.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }
    check_unique(documents)?;
    let store = ContentStore::open(&cfg.out_dir)?;

    let results: Vec<Result<DocumentRunResult, PipelineError>> =
        futures::stream::iter(documents.iter().map(|doc| {
            let store = &store;
            let ctx = resume.map(|(_, ctx)| ctx);
            async move {
                DocumentExecutor::new(doc, backends, cfg, store, ctx)
                    .run()
                    .await
            }
        }))
        .buffer_unordered(cfg.max_parallel_documents.max(1))
        .collect()
        .await;

    let mut documents_out = Vec::new();
    let mut stage_records = Vec::new();
    let mut artifacts = Vec::new();
    let mut energy = Vec::new();
    for result in results {
        let r = result?;
        documents_out.push(r.outcome);
        stage_records.extend(r.records);
        artifacts.extend(r.artifacts);
        energy.extend(r.energy);
    }

    let totals = if energy.is_empty() {
        empty_report()
    } else {
        render_report(&energy, &cfg.emissions).expect("non-empty validated ledger")
    };

    let (run_id, created_at) = match resume {
        Some((old, _)) => (old.run_id.clone(), old.created_at.clone()),
        None => (uuid::Uuid::new_v4().to_string(), now_rfc3339()),
    };
    let mut manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        run_id,
        created_at,
        corpus_hash: corpus_hash.to_string(),
        config_hash: cfg.fingerprint(),
        settings: ManifestSettings {
            chunk_size: cfg.chunk_size,
            variant_count: cfg.variant_count,
            base_seed: cfg.base_seed,
            city_name: cfg.city_name.clone(),
            strict_mode: cfg.strict_mode,
            emissions: cfg.emissions,
        },
        documents: documents_out,
        stage_records,
        artifacts,
        energy,
        totals,
    };
    manifest.canonicalize();
    manifest.save(&cfg.out_dir.join(MANIFEST_FILE))?;
    info!(
        run_id = %manifest.run_id,
        documents = manifest.documents.len(),
        images = manifest.image_artifacts().count(),
        "run complete"
    );
    Ok(manifest)
}

/// Run the full pipeline over a corpus, with document-level parallelism
/// bounded by the configuration. The manifest is written atomically to
/// `out_dir/manifest.json` even when stages failed.
pub async fn run_all(
    documents: &[Document],
    backends: &PipelineBackends,
    cfg: &RunConfig,
    corpus_hash: &str,
) -> Result<RunManifest, PipelineError> {
    run_documents(documents, backends, cfg, corpus_hash, None).await
}

/// Re-run a previous manifest: stages whose record is Ok, whose input
/// hash still chains, and whose artifacts verify are not re-executed.
/// A corpus or config hash mismatch yields [`PipelineError::ManifestStale`].
pub async fn resume(
    manifest_path: &std::path::Path,
    documents: &[Document],
    backends: &PipelineBackends,
    cfg: &RunConfig,
    corpus_hash: &str,
) -> Result<RunManifest, PipelineError> {
    let old = RunManifest::load(manifest_path)?;
    if old.corpus_hash != corpus_hash {
        return Err(PipelineError::ManifestStale {
            detail: format!(
                "corpus hash changed ({} -> {corpus_hash})",
                old.corpus_hash
            ),
        });
    }
    let config_hash = cfg.fingerprint();
    if old.config_hash != config_hash {
        return Err(PipelineError::ManifestStale {
            detail: format!("config hash changed ({} -> {config_hash})", old.config_hash),
        });
    }
    let ctx = ResumeContext::from_manifest(&old);
    run_documents(documents, backends, cfg, corpus_hash, Some((&old, &ctx))).await
}
