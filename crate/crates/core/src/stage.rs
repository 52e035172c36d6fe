//! The five pipeline stages, in their fixed execution order.

use std::fmt;

use serde::{Deserialize, Serialize};

/// One processing stage of the document pipeline.
///
/// Per document, stages always execute in the order of [`StageKind::ALL`]:
/// the back-translation consumes the reasoning output, image generation
/// consumes the validated descriptor set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    TranslateDeEn,
    Summarize,
    Reason,
    TranslateEnDe,
    ImageGen,
}

impl StageKind {
    /// All stages in execution order.
    pub const ALL: [StageKind; 5] = [
        StageKind::TranslateDeEn,
        StageKind::Summarize,
        StageKind::Reason,
        StageKind::TranslateEnDe,
        StageKind::ImageGen,
    ];

    /// Stable machine-readable identifier.
    pub fn label(self) -> &'static str {
        match self {
            StageKind::TranslateDeEn => "translate_de_en",
            StageKind::Summarize => "summarize",
            StageKind::Reason => "reason",
            StageKind::TranslateEnDe => "translate_en_de",
            StageKind::ImageGen => "image_gen",
        }
    }

    /// Human-readable step name as used in the run report.
    pub fn display_name(self) -> &'static str {
        match self {
            StageKind::TranslateDeEn => "Translate (DE -> EN)",
            StageKind::Summarize => "Summarize",
            StageKind::Reason => "Reason",
            StageKind::TranslateEnDe => "Translate (EN -> DE)",
            StageKind::ImageGen => "Generate Images",
        }
    }

    /// Position in the execution order, 0-based.
    pub fn index(self) -> usize {
        StageKind::ALL.iter().position(|s| *s == self).unwrap()
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
