//! Canonical text representation: normalization and deterministic sentence
//! segmentation for input texts and extracted web content.
//!
//! Segmentation is rule-based: sentences end at `.`, `!` or `?` followed by
//! whitespace and an uppercase letter, digit, or quote. A configurable
//! abbreviation list suppresses false splits, paragraph breaks always split,
//! and trailing text without terminal punctuation is kept as a final
//! sentence. The downstream matcher tolerates merge/split mismatches, so the
//! splitter favors determinism over linguistic perfection.

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Characters that may open a sentence after terminal punctuation.
const QUOTE_CHARS: [char; 5] = ['"', '\'', '\u{201C}', '\u{2018}', '\u{AB}'];

/// Abbreviations that never terminate a sentence.
pub const DEFAULT_ABBREVIATIONS: [&str; 11] = [
    "Mr.", "Mrs.", "Dr.", "St.", "vs.", "e.g.", "i.e.", "etc.", "Fig.", "No.", "U.S.",
];

/// Raw input text together with an opaque origin identifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawText {
    /// Normalized content (NFC, collapsed whitespace, controls stripped).
    pub content: String,
    /// Sample id or URL this text came from.
    pub source_id: String,
}

impl RawText {
    /// Builds a `RawText`, normalizing `content` on the way in.
    pub fn new(source_id: impl Into<String>, content: &str) -> Self {
        RawText {
            content: normalize(content),
            source_id: source_id.into(),
        }
    }
}

/// Half-open character-offset range into the parent [`RawText`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

/// One sentence of a segmented text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    /// Trimmed sentence text, identical to the span slice.
    pub text: String,
    /// Ordinal within the parent text, starting at 0.
    pub index: usize,
    /// Character offsets into the parent content.
    pub span: Span,
}

/// An input text split into ordered, non-overlapping sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentedText {
    pub origin: RawText,
    pub sentences: Vec<Sentence>,
}

impl SegmentedText {
    /// Joins the texts of sentences `range.start..range.end` with single spaces.
    pub fn join_range(&self, start: usize, end: usize) -> String {
        self.sentences[start..end]
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Segmentation options; the defaults match the documented splitting rules.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmenterOptions {
    /// Tokens (including the trailing period) that never end a sentence.
    pub abbreviations: Vec<String>,
    /// Sentences with fewer tokens are merged into a neighbor within the
    /// same paragraph. 0 disables the merge.
    pub min_sentence_tokens: usize,
}

impl Default for SegmenterOptions {
    fn default() -> Self {
        SegmenterOptions {
            abbreviations: DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect(),
            min_sentence_tokens: 2,
        }
    }
}

/// Normalizes text: NFC composition, control characters stripped (newline and
/// tab are treated as whitespace), whitespace runs collapsed to single spaces,
/// and blank lines preserved as paragraph breaks (`"\n\n"`).
pub fn normalize(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_ws = false;
    let mut pending_newlines = 0usize;
    let mut started = false;
    for c in raw.nfc() {
        if c.is_control() && c != '\n' && c != '\t' {
            continue;
        }
        if c.is_whitespace() {
            pending_ws = true;
            if c == '\n' {
                pending_newlines += 1;
            }
            continue;
        }
        if pending_ws && started {
            if pending_newlines >= 2 {
                out.push_str("\n\n");
            } else {
                out.push(' ');
            }
        }
        pending_ws = false;
        pending_newlines = 0;
        started = true;
        out.push(c);
    }
    out
}

/// Splits normalized text into sentences.
///
/// The returned spans are strictly increasing, non-overlapping, and tight
/// (no surrounding whitespace); gaps between spans hold the separating
/// whitespace, so spans plus gaps reconstruct the content exactly.
pub fn split_sentences(raw: &RawText, opts: &SegmenterOptions) -> Result<SegmentedText> {
    if raw.content.is_empty() {
        return Err(Error::EmptyInput);
    }
    let chars: Vec<char> = raw.content.chars().collect();

    // (start, end, paragraph id) in char offsets.
    let mut spans: Vec<(usize, usize, usize)> = Vec::new();
    let mut para_id = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        // Skip inter-sentence whitespace, counting paragraph breaks.
        let mut newlines = 0;
        while i < chars.len() && chars[i].is_whitespace() {
            if chars[i] == '\n' {
                newlines += 1;
            }
            i += 1;
        }
        if newlines >= 2 {
            para_id += 1;
        }
        if i >= chars.len() {
            break;
        }
        let start = i;
        let mut end = None;
        while i < chars.len() {
            let c = chars[i];
            if c == '\n' {
                // Paragraph break always ends the sentence.
                end = Some(i);
                break;
            }
            if matches!(c, '.' | '!' | '?') {
                let next_ws = i + 1 >= chars.len() || chars[i + 1].is_whitespace();
                if next_ws && !(c == '.' && is_abbreviation(&chars, i, &opts.abbreviations)) {
                    // Look past the whitespace for a split trigger.
                    let mut j = i + 1;
                    while j < chars.len() && chars[j].is_whitespace() && chars[j] != '\n' {
                        j += 1;
                    }
                    if j >= chars.len() || chars[j] == '\n' || is_split_trigger(chars[j]) {
                        end = Some(i + 1);
                        break;
                    }
                }
            }
            i += 1;
        }
        let end = end.unwrap_or(chars.len());
        // Trim any trailing whitespace off the span (paragraph-break case).
        let mut tight_end = end;
        while tight_end > start && chars[tight_end - 1].is_whitespace() {
            tight_end -= 1;
        }
        if tight_end > start {
            spans.push((start, tight_end, para_id));
        }
        i = end.max(i);
        if end == chars.len() {
            break;
        }
    }

    let spans = merge_short_sentences(&chars, spans, opts.min_sentence_tokens);

    let sentences = spans
        .into_iter()
        .enumerate()
        .map(|(index, (start, end, _))| Sentence {
            text: chars[start..end].iter().collect(),
            index,
            span: Span { start, end },
        })
        .collect();

    Ok(SegmentedText {
        origin: raw.clone(),
        sentences,
    })
}

/// Convenience: normalize and segment in one step.
pub fn segment(source_id: &str, content: &str, opts: &SegmenterOptions) -> Result<SegmentedText> {
    split_sentences(&RawText::new(source_id, content), opts)
}

fn is_split_trigger(c: char) -> bool {
    c.is_uppercase() || c.is_numeric() || QUOTE_CHARS.contains(&c)
}

/// True when the token ending at `chars[dot]` (a period) is a known
/// abbreviation, e.g. `Dr.` in `met Dr. Smith`.
fn is_abbreviation(chars: &[char], dot: usize, abbreviations: &[String]) -> bool {
    let mut start = dot;
    while start > 0 && !chars[start - 1].is_whitespace() {
        start -= 1;
    }
    let token: String = chars[start..=dot].iter().collect();
    abbreviations.iter().any(|a| a == &token)
}

/// Merges sentences shorter than `min_tokens` into a neighbor within the
/// same paragraph; a short sentence opening a paragraph absorbs the next one.
fn merge_short_sentences(
    chars: &[char],
    spans: Vec<(usize, usize, usize)>,
    min_tokens: usize,
) -> Vec<(usize, usize, usize)> {
    if min_tokens == 0 {
        return spans;
    }
    let token_count = |s: usize, e: usize| -> usize {
        chars[s..e]
            .iter()
            .collect::<String>()
            .split_whitespace()
            .count()
    };
    let mut merged: Vec<(usize, usize, usize)> = Vec::with_capacity(spans.len());
    for (start, end, para) in spans {
        if let Some(last) = merged.last_mut() {
            let same_para = last.2 == para;
            let short = token_count(start, end) < min_tokens || token_count(last.0, last.1) < min_tokens;
            if same_para && short {
                last.1 = end;
                continue;
            }
        }
        merged.push((start, end, para));
    }
    merged
}
