//! Greedy, monotone, anchor-initialized alignment between input sentences
//! and candidate-source sentences.
//!
//! The anchor is the source sentence most similar to the input's first
//! sentence; everything before it is dropped. Each step then compares two
//! merge families — the first input sentence against growing source
//! prefixes, and growing input prefixes against the first source sentence —
//! keeps the best pair, and removes its sentences from both lists. Only a
//! strictly greater similarity replaces the current best, so the
//! source-merge family wins ties and within a family the smallest merge
//! wins. The loop ends when either list is exhausted; leftover input
//! sentences are reported as unmatched.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::{SimilarityScore, TextSimilarity};
use crate::text::SegmentedText;

/// Half-open range of sentence indices forming one side of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegSpan {
    pub start: usize,
    pub end: usize,
}

impl SegSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, index: usize) -> bool {
        (self.start..self.end).contains(&index)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> {
        self.start..self.end
    }
}

/// One aligned pair. At most one side spans more than one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub input: SegSpan,
    pub source: SegSpan,
    pub similarity: SimilarityScore,
}

/// The full alignment produced by [`match_texts`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    /// Monotone pair list: input and source indices strictly increase.
    pub pairs: Vec<MatchedPair>,
    /// Source sentence index the alignment was anchored at.
    pub anchor_index: usize,
    pub anchor_similarity: SimilarityScore,
    /// Input sentences left over when the source ran out first.
    pub unmatched_input: Vec<usize>,
    /// Count of source sentences dropped before the anchor.
    pub unmatched_source_prefix_dropped: usize,
}

impl Matching {
    /// Input sentence indices covered by some pair.
    pub fn matched_input_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().flat_map(|p| p.input.indices())
    }
}

/// Finds the source sentence most similar to the input's first sentence.
/// Ties break toward the smallest index.
pub fn find_anchor(
    input: &SegmentedText,
    source: &SegmentedText,
    sim: &dyn TextSimilarity,
) -> Result<(usize, SimilarityScore)> {
    if input.is_empty() || source.is_empty() {
        return Err(Error::EmptyInput);
    }
    let first = &input.sentences[0].text;
    let mut best: Option<(usize, SimilarityScore)> = None;
    for (i, sentence) in source.sentences.iter().enumerate() {
        let score = sim.similarity(first, &sentence.text)?;
        match best {
            Some((_, best_score)) if score <= best_score => {}
            _ => best = Some((i, score)),
        }
    }
    Ok(best.expect("source has at least one sentence"))
}

/// Aligns `input` against `source` with the injected similarity function.
///
/// `merge_cap` bounds how many sentences one greedy step may merge; 0 means
/// unbounded, which is the faithful default (a cap changes outputs).
pub fn match_texts(
    input: &SegmentedText,
    source: &SegmentedText,
    sim: &dyn TextSimilarity,
    merge_cap: usize,
) -> Result<Matching> {
    let (anchor_index, anchor_similarity) = find_anchor(input, source, sim)?;
    let cap = if merge_cap == 0 { usize::MAX } else { merge_cap };

    let n_input = input.len();
    let n_source = source.len();
    let mut next_input = 0usize;
    let mut next_source = anchor_index;
    let mut pairs = Vec::new();

    while next_input < n_input && next_source < n_source {
        let mut best: Option<MatchedPair> = None;

        // Source-merge family: first input sentence vs. growing source prefix.
        let max_k = cap.min(n_source - next_source);
        for k in 1..=max_k {
            let source_text = source.join_range(next_source, next_source + k);
            let score = sim.similarity(&input.sentences[next_input].text, &source_text)?;
            let replace = match &best {
                None => true,
                Some(p) => score > p.similarity,
            };
            if replace {
                best = Some(MatchedPair {
                    input: SegSpan {
                        start: next_input,
                        end: next_input + 1,
                    },
                    source: SegSpan {
                        start: next_source,
                        end: next_source + k,
                    },
                    similarity: score,
                });
            }
        }

        // Input-merge family: growing input prefix vs. first source sentence.
        let max_l = cap.min(n_input - next_input);
        for l in 1..=max_l {
            let input_text = input.join_range(next_input, next_input + l);
            let score = sim.similarity(&input_text, &source.sentences[next_source].text)?;
            let replace = match &best {
                None => true,
                Some(p) => score > p.similarity,
            };
            if replace {
                best = Some(MatchedPair {
                    input: SegSpan {
                        start: next_input,
                        end: next_input + l,
                    },
                    source: SegSpan {
                        start: next_source,
                        end: next_source + 1,
                    },
                    similarity: score,
                });
            }
        }

        let pair = best.expect("both lists non-empty, so a pair exists");
        next_input = pair.input.end;
        next_source = pair.source.end;
        pairs.push(pair);
    }

    Ok(Matching {
        pairs,
        anchor_index,
        anchor_similarity,
        unmatched_input: (next_input..n_input).collect(),
        unmatched_source_prefix_dropped: anchor_index,
    })
}

/// Concatenates, in source order, the source segments of the matching,
/// joined by single spaces. This is the candidate text handed to the
/// regeneration step.
pub fn matched_text(matching: &Matching, source: &SegmentedText) -> String {
    matching
        .pairs
        .iter()
        .flat_map(|p| p.source.indices())
        .map(|i| source.sentences[i].text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}
