//! Subcommand implementations. Each returns the process exit code:
//! 0 success, 1 operational failure, 2 configuration or input errors.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use stadtbild_core::backend::{HttpBackend, InferenceBackend, MockBackend, MockScript};
use stadtbild_core::config::{CorpusDescriptor, RunConfig, StageBackendConfig};
use stadtbild_core::corpus::{chunk_sentences, segment_sentences};
use stadtbild_core::pipeline::{
    self, PipelineBackends, PipelineError, RunManifest, StageSetup, StageStatus, MANIFEST_FILE,
};
use stadtbild_core::prompts;
use stadtbild_core::site::{check_bundle, emit_site, LocaleStrings};
use stadtbild_core::stage::StageKind;
use stadtbild_core::telemetry::{format_report, render_report};

pub fn validate(corpus_path: &Path, chunk_size: usize) -> u8 {
    let descriptor = match CorpusDescriptor::load(corpus_path) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if chunk_size == 0 {
        eprintln!("error: chunk_size must be at least 1");
        return 1;
    }

    let mut failures = 0usize;
    println!(
        "{:<12} {:<18} {:>10} {:>8}",
        "party", "source", "sentences", "chunks"
    );
    for party in &descriptor.parties {
        let sources = [
            (party.program.as_ref(), stadtbild_core::corpus::SourceKind::Program),
            (
                party.compass.as_ref(),
                stadtbild_core::corpus::SourceKind::CompassResponses,
            ),
        ];
        for (path, kind) in sources {
            let Some(path) = path else { continue };
            let resolved = descriptor.base_dir.join(path);
            match stadtbild_core::corpus::load_document(&resolved, &party.id, &party.name, kind) {
                Ok(doc) => {
                    let spans = segment_sentences(&doc);
                    let chunks = chunk_sentences(&spans, chunk_size).expect("chunk_size checked");
                    println!(
                        "{:<12} {:<18} {:>10} {:>8}",
                        party.id,
                        kind.label(),
                        spans.len(),
                        chunks.len()
                    );
                }
                Err(e) => {
                    failures += 1;
                    eprintln!("error: {}/{}: {e}", party.id, kind.label());
                }
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} document(s) failed to load");
        1
    } else {
        0
    }
}

fn http_setup(stage_cfg: &StageBackendConfig, default_tokens: u32) -> Result<StageSetup, String> {
    let backend = HttpBackend::new(stage_cfg.to_backend_config()).map_err(|e| e.to_string())?;
    Ok(StageSetup {
        backend: Arc::new(backend) as Arc<dyn InferenceBackend>,
        avg_power_w: stage_cfg.avg_power_w,
        max_output_tokens: stage_cfg.max_output_tokens.unwrap_or(default_tokens),
        dedicated_summarizer: stage_cfg.dedicated_summarizer,
        supports_seed: stage_cfg.supports_seed,
    })
}

fn mock_setup(
    stage_cfg: &StageBackendConfig,
    script: &MockScript,
    default_tokens: u32,
) -> StageSetup {
    let backend = MockBackend::new(
        format!("mock:{}", stage_cfg.name),
        stage_cfg.model_id.clone(),
        script.clone(),
    );
    StageSetup {
        backend: Arc::new(backend) as Arc<dyn InferenceBackend>,
        avg_power_w: stage_cfg.avg_power_w,
        max_output_tokens: stage_cfg.max_output_tokens.unwrap_or(default_tokens),
        dedicated_summarizer: stage_cfg.dedicated_summarizer,
        // The mock renders seed-derived placeholders, so seeds are always
        // honored and recorded.
        supports_seed: true,
    }
}

fn build_backends(cfg: &RunConfig, mock: bool) -> Result<PipelineBackends, String> {
    let tokens = cfg.max_output_tokens;
    if mock {
        let script = match &cfg.mock_script {
            Some(path) => MockScript::load(path).map_err(|e| e.to_string())?,
            None => MockScript::new(),
        };
        let setup = |stage: StageKind| mock_setup(cfg.backends.for_stage(stage), &script, tokens);
        Ok(PipelineBackends {
            translate_de_en: setup(StageKind::TranslateDeEn),
            summarize: setup(StageKind::Summarize),
            reason: setup(StageKind::Reason),
            translate_en_de: setup(StageKind::TranslateEnDe),
            image_gen: setup(StageKind::ImageGen),
        })
    } else {
        Ok(PipelineBackends {
            translate_de_en: http_setup(cfg.backends.for_stage(StageKind::TranslateDeEn), tokens)?,
            summarize: http_setup(cfg.backends.for_stage(StageKind::Summarize), tokens)?,
            reason: http_setup(cfg.backends.for_stage(StageKind::Reason), tokens)?,
            translate_en_de: http_setup(cfg.backends.for_stage(StageKind::TranslateEnDe), tokens)?,
            image_gen: http_setup(cfg.backends.for_stage(StageKind::ImageGen), tokens)?,
        })
    }
}

pub fn run(config_path: &Path, mock: bool, resume: bool, strict: bool, out: Option<PathBuf>) -> u8 {
    let mut cfg = match RunConfig::from_toml_file(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    if strict {
        cfg.strict_mode = true;
    }
    if let Some(out) = out {
        cfg.out_dir = out;
    }

    let descriptor = match CorpusDescriptor::load(&cfg.corpus) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    let documents = match descriptor.load_documents() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    let backends = match build_backends(&cfg, mock) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .expect("tokio runtime");

    let manifest_path = cfg.out_dir.join(MANIFEST_FILE);
    let result = runtime.block_on(async {
        if resume && manifest_path.is_file() {
            match pipeline::resume(
                &manifest_path,
                &documents,
                &backends,
                &cfg,
                &descriptor.content_hash,
            )
            .await
            {
                Err(PipelineError::ManifestStale { detail }) => {
                    eprintln!("note: {detail}; starting a fresh run");
                    pipeline::run_all(&documents, &backends, &cfg, &descriptor.content_hash).await
                }
                Err(PipelineError::Manifest(e)) => {
                    eprintln!("note: existing manifest unusable ({e}); starting a fresh run");
                    pipeline::run_all(&documents, &backends, &cfg, &descriptor.content_hash).await
                }
                other => other,
            }
        } else {
            pipeline::run_all(&documents, &backends, &cfg, &descriptor.content_hash).await
        }
    });

    let manifest = match result {
        Ok(m) => m,
        Err(e) => {
            eprintln!("pipeline error: {e}");
            return 1;
        }
    };

    println!("{}", format_report(&manifest.totals));
    println!();
    let failed: Vec<String> = manifest
        .stage_records
        .iter()
        .filter(|r| r.status != StageStatus::Ok)
        .map(|r| format!("{}/{} {} ({:?})", r.party_id, r.source_kind, r.stage, r.status))
        .collect();
    println!(
        "manifest: {} ({} documents, {} images)",
        manifest_path.display(),
        manifest.documents.len(),
        manifest.image_artifacts().count()
    );
    if failed.is_empty() {
        0
    } else {
        eprintln!("{} stage(s) did not complete:", failed.len());
        for line in failed {
            eprintln!("  {line}");
        }
        1
    }
}

pub fn report(manifest_path: &Path, correction: Option<f64>) -> u8 {
    let manifest = match RunManifest::load(manifest_path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let mut emissions_cfg = manifest.settings.emissions;
    if let Some(correction) = correction {
        emissions_cfg.underestimation_correction = correction;
    }
    match render_report(&manifest.energy, &emissions_cfg) {
        Ok(report) => {
            println!("{}", format_report(&report));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn site(
    manifest_path: &Path,
    out_dir: &Path,
    strings_path: Option<PathBuf>,
    allow_incomplete: bool,
) -> u8 {
    let manifest = match RunManifest::load(manifest_path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let strings = match strings_path {
        Some(path) => match LocaleStrings::from_json_file(&path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        },
        None => LocaleStrings::builtin(),
    };
    let run_dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    match emit_site(&manifest, run_dir, &strings, out_dir, allow_incomplete) {
        Ok(bundle) => {
            if let Err(e) = check_bundle(out_dir) {
                eprintln!("error: {e}");
                return 1;
            }
            println!(
                "bundle: {} ({} pages, {} assets)",
                bundle.root.display(),
                bundle.pages.len(),
                bundle.assets.len()
            );
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn prompts_show() -> u8 {
    for stage in StageKind::ALL {
        let template = prompts::template_for(stage);
        println!("--- {} (version {}) ---", stage.label(), template.version);
        println!("{}\n", template.template_text);
    }
    0
}
