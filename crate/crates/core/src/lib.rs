//! Pipeline library for turning political program documents into accessible
//! city-appearance analyses: chunked translation, summarization, constrained
//! extraction of five visual descriptors, back-translation, batched image
//! generation, per-stage energy accounting, and a static bilingual results
//! bundle.
//!
//! The pipeline talks to inference services through the [`backend`] trait,
//! which has one OpenAI-compatible HTTP implementation and one deterministic
//! mock implementation for offline runs and tests.

pub mod backend;
pub mod config;
pub mod corpus;
pub mod parse;
pub mod pipeline;
pub mod prompts;
pub mod site;
pub mod stage;
pub mod telemetry;

pub use backend::{
    BackendConfig, BackendError, ChatRequest, ChatResponse, GeneratedImage, ImageRequest,
    ImageResult, InferenceBackend, MockBackend, MockScript,
};
pub use config::{CorpusDescriptor, RunConfig, StageBackendConfig};
pub use corpus::{Chunk, Document, SentenceSpan, SourceKind};
pub use parse::{DescriptorSet, RawReasoningOutput, Violation, ViolationKind, ViolationTally};
pub use pipeline::{
    ArtifactEntry, ArtifactKind, ContentStore, DocumentOutcome, PipelineBackends, RunManifest,
    StageRecord, StageSetup, StageStatus,
};
pub use stage::StageKind;
pub use telemetry::{EmissionsConfig, EmissionsReport, EnergyLedger, EnergyRecord, ReportRow};
