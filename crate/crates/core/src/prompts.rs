//! Versioned prompt templates and slot rendering.
//!
//! Template wording is pinned; the version integer is recorded in every
//! stage record so that runs remain auditable when wording evolves. The
//! city name is a slot so the method transfers to other municipalities.

use serde::Serialize;
use thiserror::Error;

use crate::parse::DescriptorSet;
use crate::stage::StageKind;

/// Default city slot value for the image prompt.
pub const DEFAULT_CITY: &str = "Dortmund";

/// A pinned prompt template with named slots.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PromptTemplate {
    pub stage: StageKind,
    pub template_text: &'static str,
    pub version: u32,
}

pub const TRANSLATE_DE_EN: PromptTemplate = PromptTemplate {
    stage: StageKind::TranslateDeEn,
    template_text: "Translate the following sentences from German into English: {sentences}",
    version: 1,
};

pub const TRANSLATE_EN_DE: PromptTemplate = PromptTemplate {
    stage: StageKind::TranslateEnDe,
    template_text: "Translate the following sentences from English into German: {sentences}",
    version: 1,
};

pub const SUMMARIZE: PromptTemplate = PromptTemplate {
    stage: StageKind::Summarize,
    template_text: "Summarize the following political program concisely:\n{text}",
    version: 1,
};

pub const REASON: PromptTemplate = PromptTemplate {
    stage: StageKind::Reason,
    template_text: "Identify five important visual aspects of a city appearance that would be \
                    affected or impacted by this political program. Describe each aspect in an \
                    informative and concise way, with 3 to 6 words. Return these five visual \
                    descriptions as a comma-separated list.\n{program_summary}",
    version: 1,
};

pub const IMAGE_GEN: PromptTemplate = PromptTemplate {
    stage: StageKind::ImageGen,
    template_text: "{city} city, with additional {visual_descriptions}",
    version: 1,
};

/// Template for a stage, for audit dumps and version stamping.
pub fn template_for(stage: StageKind) -> &'static PromptTemplate {
    match stage {
        StageKind::TranslateDeEn => &TRANSLATE_DE_EN,
        StageKind::Summarize => &SUMMARIZE,
        StageKind::Reason => &REASON,
        StageKind::TranslateEnDe => &TRANSLATE_EN_DE,
        StageKind::ImageGen => &IMAGE_GEN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranslationDirection {
    DeEn,
    EnDe,
}

/// How the summarization backend consumes its input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummarizerMode {
    /// A dedicated summarization model takes the raw text as-is.
    Dedicated,
    /// A chat model needs an instruction prefix.
    ChatInstruction,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("prompt input must not be empty")]
    EmptyInput,
    #[error("descriptor set must contain exactly 5 items, got {len}")]
    InvalidDescriptorSet { len: usize },
}

pub fn render_translation_prompt(
    direction: TranslationDirection,
    sentences: &str,
) -> Result<String, PromptError> {
    if sentences.trim().is_empty() {
        return Err(PromptError::EmptyInput);
    }
    let template = match direction {
        TranslationDirection::DeEn => TRANSLATE_DE_EN.template_text,
        TranslationDirection::EnDe => TRANSLATE_EN_DE.template_text,
    };
    Ok(template.replace("{sentences}", sentences))
}

pub fn render_reasoning_prompt(program_summary: &str) -> Result<String, PromptError> {
    if program_summary.trim().is_empty() {
        return Err(PromptError::EmptyInput);
    }
    Ok(REASON
        .template_text
        .replace("{program_summary}", program_summary))
}

/// Render the image prompt from a validated descriptor set.
///
/// Rejects sets that do not contain exactly five descriptors; upstream
/// parsing records the violation, but the image contract requires five.
pub fn render_image_prompt(city: &str, descriptors: &DescriptorSet) -> Result<String, PromptError> {
    if city.trim().is_empty() {
        return Err(PromptError::EmptyInput);
    }
    if descriptors.descriptors.len() != 5 {
        return Err(PromptError::InvalidDescriptorSet {
            len: descriptors.descriptors.len(),
        });
    }
    Ok(IMAGE_GEN
        .template_text
        .replace("{city}", city)
        .replace("{visual_descriptions}", &descriptors.descriptors.join(", ")))
}

/// Build the summarization input for the configured backend mode.
pub fn render_summarize_input(
    translated_text: &str,
    mode: SummarizerMode,
) -> Result<String, PromptError> {
    if translated_text.trim().is_empty() {
        return Err(PromptError::EmptyInput);
    }
    Ok(match mode {
        SummarizerMode::Dedicated => translated_text.to_string(),
        SummarizerMode::ChatInstruction => SUMMARIZE.template_text.replace("{text}", translated_text),
    })
}
