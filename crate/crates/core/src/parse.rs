//! Reasoning-output parsing: chain-of-thought extraction, comma-separated
//! descriptor lists, and contract-violation classification.
//!
//! Parsing is lenient by default: violations are recorded alongside the
//! descriptors without mutating their text (casing is preserved as the
//! model produced it). `strict` turns any violation into a hard error.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SourceKind;

const THINK_OPEN: &str = "<think>";
const THINK_CLOSE: &str = "</think>";

/// Word count range the reasoning prompt instructs per descriptor.
pub const WORD_COUNT_RANGE: (usize, usize) = (3, 6);

/// Raw reasoning-model output split into chain-of-thought and answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawReasoningOutput {
    pub full_text: String,
    pub think_block: Option<String>,
    pub answer_text: String,
}

/// The validated list of visual-aspect descriptors for one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptorSet {
    pub descriptors: Vec<String>,
    pub violations: Vec<Violation>,
    pub source_party: String,
    pub source_kind: SourceKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    CountMismatch,
    WordCountOutOfRange,
    CaseInconsistency,
    EmptyItem,
}

impl ViolationKind {
    pub const ALL: [ViolationKind; 4] = [
        ViolationKind::CountMismatch,
        ViolationKind::WordCountOutOfRange,
        ViolationKind::CaseInconsistency,
        ViolationKind::EmptyItem,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ViolationKind::CountMismatch => "count_mismatch",
            ViolationKind::WordCountOutOfRange => "word_count_out_of_range",
            ViolationKind::CaseInconsistency => "case_inconsistency",
            ViolationKind::EmptyItem => "empty_item",
        }
    }
}

/// One recorded deviation from the descriptor output contract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Index into the descriptor list; absent for set-level violations
    /// (count mismatch, case inconsistency).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub item_index: Option<usize>,
    pub detail: String,
}

/// Violation counts by kind, in enum order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationTally {
    pub count_mismatch: usize,
    pub word_count_out_of_range: usize,
    pub case_inconsistency: usize,
    pub empty_item: usize,
}

impl ViolationTally {
    pub fn get(&self, kind: ViolationKind) -> usize {
        match kind {
            ViolationKind::CountMismatch => self.count_mismatch,
            ViolationKind::WordCountOutOfRange => self.word_count_out_of_range,
            ViolationKind::CaseInconsistency => self.case_inconsistency,
            ViolationKind::EmptyItem => self.empty_item,
        }
    }

    fn add(&mut self, kind: ViolationKind) {
        match kind {
            ViolationKind::CountMismatch => self.count_mismatch += 1,
            ViolationKind::WordCountOutOfRange => self.word_count_out_of_range += 1,
            ViolationKind::CaseInconsistency => self.case_inconsistency += 1,
            ViolationKind::EmptyItem => self.empty_item += 1,
        }
    }

    /// Rows in deterministic kind order, for reports.
    pub fn rows(&self) -> Vec<(ViolationKind, usize)> {
        ViolationKind::ALL.iter().map(|&k| (k, self.get(k))).collect()
    }

    pub fn as_map(&self) -> BTreeMap<&'static str, usize> {
        self.rows().into_iter().map(|(k, n)| (k.label(), n)).collect()
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("reasoning answer is empty")]
    EmptyAnswer,
    #[error("descriptor contract violated: {summary}")]
    ContractViolation {
        summary: String,
        violations: Vec<Violation>,
    },
}

/// Split raw model output into an optional leading `<think>` block and the
/// remaining answer text.
///
/// An unclosed opener swallows the rest of the text as chain-of-thought,
/// leaving an empty answer that surfaces downstream as `EmptyAnswer`.
pub fn extract_think_block(full_text: &str) -> RawReasoningOutput {
    let trimmed = full_text.trim_start();
    if let Some(rest) = trimmed.strip_prefix(THINK_OPEN) {
        if let Some(close) = rest.find(THINK_CLOSE) {
            let think = &rest[..close];
            let answer = &rest[close + THINK_CLOSE.len()..];
            return RawReasoningOutput {
                full_text: full_text.to_string(),
                think_block: Some(think.trim().to_string()),
                answer_text: answer.trim().to_string(),
            };
        }
        return RawReasoningOutput {
            full_text: full_text.to_string(),
            think_block: Some(rest.trim().to_string()),
            answer_text: String::new(),
        };
    }
    RawReasoningOutput {
        full_text: full_text.to_string(),
        think_block: None,
        answer_text: full_text.trim().to_string(),
    }
}

/// Split a comma-separated list on commas that sit outside parentheses.
pub(crate) fn split_outside_parens(text: &str) -> Vec<&str> {
    let mut items = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                items.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push(&text[start..]);
    items
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Whitespace-split word count; hyphenated compounds count as one word.
pub fn word_count(descriptor: &str) -> usize {
    descriptor.split_whitespace().count()
}

/// True when the majority of words start with an uppercase letter; ties
/// count as title case since list items usually capitalize the first word.
fn is_title_case_majority(descriptor: &str) -> bool {
    let (mut upper, mut lower) = (0usize, 0usize);
    for word in descriptor.split_whitespace() {
        match word.chars().next() {
            Some(c) if c.is_uppercase() => upper += 1,
            Some(c) if c.is_lowercase() => lower += 1,
            _ => {}
        }
    }
    upper >= lower
}

/// Parse a reasoning answer into a descriptor set, recording contract
/// violations without altering descriptor text.
///
/// Items are split on commas outside parentheses, trimmed, and internal
/// whitespace runs collapsed; a trailing period is dropped from the final
/// item. With `strict` any violation becomes a [`ParseError::ContractViolation`].
pub fn parse_descriptor_list(
    answer_text: &str,
    source_party: &str,
    source_kind: SourceKind,
    strict: bool,
) -> Result<DescriptorSet, ParseError> {
    if answer_text.trim().is_empty() {
        return Err(ParseError::EmptyAnswer);
    }

    let mut violations = Vec::new();
    let mut descriptors = Vec::new();
    let raw_items = split_outside_parens(answer_text.trim());
    let last_raw = raw_items.len() - 1;

    for (raw_index, raw) in raw_items.iter().enumerate() {
        let mut item = collapse_whitespace(raw);
        if raw_index == last_raw {
            if let Some(stripped) = item.strip_suffix('.') {
                item = stripped.to_string();
            }
        }
        if item.is_empty() {
            violations.push(Violation {
                kind: ViolationKind::EmptyItem,
                item_index: Some(raw_index),
                detail: format!("item {raw_index} is empty"),
            });
            continue;
        }
        descriptors.push(item);
    }

    if descriptors.len() != 5 {
        violations.push(Violation {
            kind: ViolationKind::CountMismatch,
            item_index: None,
            detail: format!("expected 5 descriptors, got {}", descriptors.len()),
        });
    }

    for (i, descriptor) in descriptors.iter().enumerate() {
        let words = word_count(descriptor);
        if words < WORD_COUNT_RANGE.0 || words > WORD_COUNT_RANGE.1 {
            violations.push(Violation {
                kind: ViolationKind::WordCountOutOfRange,
                item_index: Some(i),
                detail: format!("\"{descriptor}\" has {words} words, expected 3 to 6"),
            });
        }
    }

    if !descriptors.is_empty() {
        let title = descriptors.iter().filter(|d| is_title_case_majority(d)).count();
        if title != 0 && title != descriptors.len() {
            violations.push(Violation {
                kind: ViolationKind::CaseInconsistency,
                item_index: None,
                detail: "items mix title-case and lower-case styles".to_string(),
            });
        }
    }

    if strict && !violations.is_empty() {
        let summary = violations
            .iter()
            .map(|v| v.kind.label())
            .collect::<Vec<_>>()
            .join(", ");
        return Err(ParseError::ContractViolation {
            summary,
            violations,
        });
    }

    Ok(DescriptorSet {
        descriptors,
        violations,
        source_party: source_party.to_string(),
        source_kind,
    })
}

/// Tally violations by kind across descriptor sets.
pub fn summarize_violations(sets: &[DescriptorSet]) -> ViolationTally {
    let mut tally = ViolationTally::default();
    for set in sets {
        for v in &set.violations {
            tally.add(v.kind);
        }
    }
    tally
}
