//! Document loading, sentence segmentation, and fixed-size chunking.
//!
//! Documents are normalized on load (NFC, unified newlines, control
//! characters stripped, blank lines collapsed) and hashed so that equal
//! bodies always yield equal content hashes. Segmentation is rule-based
//! with a fixed German abbreviation list; chunking groups consecutive
//! sentences into units of `chunk_size` for stage-wise model calls.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Whether a document is a full election program or the party's
/// election-compass responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Program,
    CompassResponses,
}

impl SourceKind {
    pub fn label(self) -> &'static str {
        match self {
            SourceKind::Program => "program",
            SourceKind::CompassResponses => "compass_responses",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One party's primary text with its identity and content hash.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub party_id: String,
    pub party_name: String,
    pub source_kind: SourceKind,
    /// BCP-47-style language tag of the body.
    pub language: String,
    /// Normalized full text.
    pub body: String,
    /// Hex SHA-256 of the normalized body.
    pub content_hash: String,
}

impl Document {
    /// Build a document from raw text, applying normalization and hashing.
    ///
    /// `is_markdown` strips Markdown syntax down to plain text first.
    pub fn from_text(
        raw: &str,
        party_id: &str,
        party_name: &str,
        source_kind: SourceKind,
        is_markdown: bool,
    ) -> Result<Self, CorpusError> {
        let text = if is_markdown {
            strip_markdown(raw)
        } else {
            raw.to_string()
        };
        let body = normalize_body(&text);
        if body.is_empty() {
            return Err(CorpusError::EmptyDocument {
                origin: format!("{party_id}/{source_kind}"),
            });
        }
        let content_hash = sha256_hex(body.as_bytes());
        Ok(Document {
            party_id: party_id.to_string(),
            party_name: party_name.to_string(),
            source_kind,
            language: "de".to_string(),
            body,
            content_hash,
        })
    }
}

/// One sentence within a document body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    /// 0-based ordinal within the document.
    pub index: usize,
    /// Byte offset of the first character in the document body.
    pub start: usize,
    /// Byte offset one past the last character.
    pub end: usize,
    /// The sentence text, no leading or trailing whitespace.
    pub text: String,
}

/// A fixed-size group of consecutive sentences sent to the translation
/// model in one request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub index: usize,
    pub sentences: Vec<SentenceSpan>,
    /// Sentence texts joined by a single space.
    pub text: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("file not found: {path}")]
    FileNotFound { path: String },
    #[error("not valid UTF-8: {path}")]
    Encoding { path: String },
    #[error("document is empty after normalization: {origin}")]
    EmptyDocument { origin: String },
    #[error("chunk_size must be at least 1")]
    InvalidChunkSize,
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Normalize raw document text: NFC, unified line endings, tabs to spaces,
/// other control characters removed, runs of blank lines collapsed to one,
/// and outer whitespace trimmed.
pub fn normalize_body(raw: &str) -> String {
    let nfc: String = raw.nfc().collect();
    let unified = nfc.replace("\r\n", "\n").replace('\r', "\n");
    let mut cleaned = String::with_capacity(unified.len());
    for ch in unified.chars() {
        match ch {
            '\n' => cleaned.push('\n'),
            '\t' => cleaned.push(' '),
            c if c.is_control() => {}
            c => cleaned.push(c),
        }
    }
    // Collapse runs of blank lines: more than one consecutive newline
    // (ignoring spaces on the blank lines) becomes exactly two.
    let mut out = String::with_capacity(cleaned.len());
    let mut pending_newlines = 0usize;
    for line in cleaned.split('\n') {
        if line.trim().is_empty() {
            pending_newlines += 1;
            continue;
        }
        if !out.is_empty() {
            out.push_str(if pending_newlines > 1 { "\n\n" } else { "\n" });
        }
        pending_newlines = 1;
        out.push_str(line.trim_end());
    }
    out.trim().to_string()
}

/// Strip Markdown syntax, keeping only the rendered text content.
pub fn strip_markdown(markdown: &str) -> String {
    use pulldown_cmark::{Event, Parser, Tag, TagEnd};

    let mut out = String::new();
    for event in Parser::new(markdown) {
        match event {
            Event::Text(t) | Event::Code(t) => out.push_str(&t),
            Event::SoftBreak => out.push(' '),
            Event::HardBreak => out.push('\n'),
            Event::Start(Tag::Item) => out.push('\n'),
            Event::End(
                TagEnd::Paragraph | TagEnd::Heading(_) | TagEnd::Item | TagEnd::CodeBlock,
            ) => out.push_str("\n\n"),
            _ => {}
        }
    }
    out
}

/// Load a document from a UTF-8 text or Markdown file.
pub fn load_document(
    path: &Path,
    party_id: &str,
    party_name: &str,
    source_kind: SourceKind,
) -> Result<Document, CorpusError> {
    let display = path.display().to_string();
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(CorpusError::FileNotFound { path: display })
        }
        Err(e) => {
            return Err(CorpusError::Io {
                path: display,
                source: e,
            })
        }
    };
    let raw = String::from_utf8(bytes).map_err(|_| CorpusError::Encoding {
        path: display.clone(),
    })?;
    let is_markdown = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some(ext) if ext.eq_ignore_ascii_case("md") || ext.eq_ignore_ascii_case("markdown")
    );
    Document::from_text(&raw, party_id, party_name, source_kind, is_markdown).map_err(|e| {
        match e {
            CorpusError::EmptyDocument { .. } => CorpusError::EmptyDocument { origin: display },
            other => other,
        }
    })
}

/// Sentence terminator characters.
const TERMINATORS: [char; 4] = ['.', '!', '?', '…'];

/// German abbreviations that never terminate a sentence (compared
/// case-insensitively against the token ending at the period).
const ABBREVIATIONS: [&str; 30] = [
    "z.b.", "bzw.", "ca.", "dr.", "nr.", "u.a.", "etc.", "usw.", "vgl.", "inkl.", "ggf.",
    "evtl.", "bspw.", "d.h.", "u.u.", "abs.", "art.", "mio.", "mrd.", "prof.", "hr.", "fr.",
    "str.", "tel.", "sog.", "o.ä.", "z.t.", "u.v.m.", "abb.", "s.o.",
];

/// Characters that may close a sentence after its terminator (quotes,
/// brackets) before the inter-sentence whitespace.
const CLOSERS: [char; 7] = ['"', '\'', '\u{201c}', '\u{201d}', '\u{00bb}', ')', ']'];

/// Split a document body into sentence spans.
///
/// A terminator ends a sentence when it is followed by optional closing
/// quotes/brackets, then whitespace and an uppercase letter, or by the end
/// of the text. Periods inside decimal numbers and after the fixed
/// abbreviation list do not terminate. A body without any terminator
/// yields a single span.
pub fn segment_sentences(doc: &Document) -> Vec<SentenceSpan> {
    segment_text(&doc.body)
}

fn segment_text(body: &str) -> Vec<SentenceSpan> {
    let chars: Vec<(usize, char)> = body.char_indices().collect();
    let mut boundaries: Vec<usize> = Vec::new(); // byte offsets one past each sentence end

    for (i, &(_, ch)) in chars.iter().enumerate() {
        if !TERMINATORS.contains(&ch) {
            continue;
        }
        if ch == '.' {
            // Decimal number: digit on both sides.
            let prev_digit = i > 0 && chars[i - 1].1.is_ascii_digit();
            let next_digit = chars.get(i + 1).is_some_and(|&(_, c)| c.is_ascii_digit());
            if prev_digit && next_digit {
                continue;
            }
            if token_is_abbreviation(&chars, i) {
                continue;
            }
        }
        // Skip closing quotes/brackets directly after the terminator.
        let mut j = i + 1;
        while j < chars.len() && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }
        if j >= chars.len() {
            boundaries.push(chars[j - 1].0 + chars[j - 1].1.len_utf8());
            continue;
        }
        // Require whitespace, then the next non-whitespace must open a new
        // sentence with an uppercase letter (opening quotes allowed).
        if !chars[j].1.is_whitespace() {
            continue;
        }
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        if k >= chars.len() {
            boundaries.push(chars[j - 1].0 + chars[j - 1].1.len_utf8());
            continue;
        }
        let mut m = k;
        while m < chars.len() && matches!(chars[m].1, '"' | '\u{201e}' | '\u{00ab}' | '(' | '[') {
            m += 1;
        }
        if m < chars.len() && chars[m].1.is_uppercase() {
            boundaries.push(chars[j - 1].0 + chars[j - 1].1.len_utf8());
        }
    }

    let total = body.len();
    if boundaries.last() != Some(&total) {
        boundaries.push(total);
    }

    let mut spans = Vec::with_capacity(boundaries.len());
    let mut cursor = 0usize;
    for &bound in &boundaries {
        let slice = &body[cursor..bound];
        let trimmed = slice.trim();
        if !trimmed.is_empty() {
            let lead = slice.len() - slice.trim_start().len();
            let start = cursor + lead;
            spans.push(SentenceSpan {
                index: spans.len(),
                start,
                end: start + trimmed.len(),
                text: trimmed.to_string(),
            });
        }
        cursor = bound;
    }
    spans
}

/// True when the non-whitespace token ending at `chars[dot]` (inclusive)
/// is in the abbreviation list.
fn token_is_abbreviation(chars: &[(usize, char)], dot: usize) -> bool {
    let mut start = dot;
    while start > 0 && !chars[start - 1].1.is_whitespace() {
        start -= 1;
    }
    let token: String = chars[start..=dot]
        .iter()
        .map(|&(_, c)| c)
        .collect::<String>()
        .to_lowercase();
    ABBREVIATIONS.contains(&token.as_str())
}

/// Group sentence spans into chunks of `chunk_size`; the last chunk may be
/// shorter. Produces `ceil(n / chunk_size)` chunks.
pub fn chunk_sentences(
    spans: &[SentenceSpan],
    chunk_size: usize,
) -> Result<Vec<Chunk>, CorpusError> {
    if chunk_size == 0 {
        return Err(CorpusError::InvalidChunkSize);
    }
    Ok(spans
        .chunks(chunk_size)
        .enumerate()
        .map(|(index, group)| Chunk {
            index,
            sentences: group.to_vec(),
            text: group
                .iter()
                .map(|s| s.text.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        })
        .collect())
}
