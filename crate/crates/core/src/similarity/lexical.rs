//! Deterministic lexical reference embedder for offline tests and runs
//! without a network embedding provider.
//!
//! A text is lowercased and split on whitespace; each word contributes its
//! character trigrams (words shorter than three characters count as a single
//! gram). Gram counts are hashed into a fixed 1024-bucket space with a fixed
//! FNV-1a seed and L2-normalized, so vectors are identical across runs and
//! platforms. Word-internal grams make the embedding insensitive to word
//! order at this granularity.

use crate::error::{Error, Result};
use crate::hashing::fnv1a64;

use super::{EmbeddingProvider, EmbeddingVector};

/// Bucket count of the hashed trigram space.
pub const LEXICAL_BUCKETS: usize = 1024;

/// Fixed hash seed; part of the embedder's documented identity. Changing it
/// changes every vector this embedder ever produced.
pub const LEXICAL_HASH_SEED: u64 = 0x7472_6967_7261_6d31;

/// The lexical trigram embedder. Stateless and reentrant.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalEmbedder;

impl LexicalEmbedder {
    /// Embeds a single text. Errors on empty or whitespace-only input.
    pub fn embed_one(&self, text: &str) -> Result<EmbeddingVector> {
        let lowered = text.to_lowercase();
        let mut counts = vec![0.0f32; LEXICAL_BUCKETS];
        let mut any = false;
        for word in lowered.split_whitespace() {
            any = true;
            let chars: Vec<char> = word.chars().collect();
            if chars.len() < 3 {
                bump(&mut counts, word.as_bytes());
            } else {
                for gram in chars.windows(3) {
                    let gram: String = gram.iter().collect();
                    bump(&mut counts, gram.as_bytes());
                }
            }
        }
        if !any {
            return Err(Error::EmptyText);
        }
        EmbeddingVector::unit(counts)
    }
}

fn bump(counts: &mut [f32], gram: &[u8]) {
    let bucket = (fnv1a64(LEXICAL_HASH_SEED, gram) % LEXICAL_BUCKETS as u64) as usize;
    counts[bucket] += 1.0;
}

impl EmbeddingProvider for LexicalEmbedder {
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        texts.iter().map(|t| self.embed_one(t)).collect()
    }
}
