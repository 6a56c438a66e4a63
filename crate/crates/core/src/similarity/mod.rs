//! Sentence similarity: embedding vectors, cosine, a pluggable provider
//! interface with an embedding cache, and hand-checkable reference
//! similarity functions.

mod http;
mod lexical;

pub use http::HttpEmbedder;
pub use lexical::{LexicalEmbedder, LEXICAL_BUCKETS, LEXICAL_HASH_SEED};

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Similarity of two texts; the dot product of unit vectors, in [-1, 1].
/// For the lexical reference embedder the value stays in [0, 1].
pub type SimilarityScore = f64;

/// A unit-norm embedding vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f32>,
}

impl EmbeddingVector {
    /// Builds a vector, renormalizing to unit length when the provider did
    /// not already do so. Zero vectors cannot be normalized.
    pub fn unit(mut values: Vec<f32>) -> Result<Self> {
        let norm = values.iter().map(|v| f64::from(*v) * f64::from(*v)).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        if (norm - 1.0).abs() > 1e-6 {
            for v in &mut values {
                *v = (f64::from(*v) / norm) as f32;
            }
        }
        Ok(EmbeddingVector { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| f64::from(*v) * f64::from(*v))
            .sum::<f64>()
            .sqrt()
    }
}

/// Dot product of two unit vectors, clamped to [-1, 1].
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<SimilarityScore> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let dot: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| f64::from(*x) * f64::from(*y))
        .sum();
    Ok(dot.clamp(-1.0, 1.0))
}

/// Source of sentence embeddings. Implementations must return unit vectors
/// (or vectors the caller can renormalize) in input order.
pub trait EmbeddingProvider: Send + Sync {
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>>;
}

/// Process-wide embedding cache keyed by the exact post-normalization text.
///
/// Unbounded by default; an optional cap evicts the least recently used
/// entry. Races on identical keys are benign: the first computed vector
/// wins, so nondeterministic providers still yield stable results.
pub struct EmbeddingCache {
    inner: Mutex<CacheInner>,
}

struct CacheInner {
    map: HashMap<String, (Arc<EmbeddingVector>, u64)>,
    tick: u64,
    cap: usize,
}

impl EmbeddingCache {
    /// `cap` of 0 means unbounded.
    pub fn new(cap: usize) -> Self {
        EmbeddingCache {
            inner: Mutex::new(CacheInner {
                map: HashMap::new(),
                tick: 0,
                cap,
            }),
        }
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, key: &str) -> Option<Arc<EmbeddingVector>> {
        let mut inner = self.inner.lock().unwrap();
        inner.tick += 1;
        let tick = inner.tick;
        inner.map.get_mut(key).map(|entry| {
            entry.1 = tick;
            entry.0.clone()
        })
    }

    fn insert(&self, key: &str, vector: Arc<EmbeddingVector>) -> Arc<EmbeddingVector> {
        let mut inner = self.inner.lock().unwrap();
        inner.tick += 1;
        let tick = inner.tick;
        if let Some(existing) = inner.map.get(key) {
            // First write wins.
            return existing.0.clone();
        }
        if inner.cap > 0 && inner.map.len() >= inner.cap {
            if let Some(oldest) = inner
                .map
                .iter()
                .min_by_key(|(_, (_, t))| *t)
                .map(|(k, _)| k.clone())
            {
                inner.map.remove(&oldest);
            }
        }
        inner.map.insert(key.to_string(), (vector.clone(), tick));
        vector
    }
}

/// Injectable similarity function used by the matcher and pipeline:
/// embedding cosine in production, token Jaccard for hand-derivable tests.
pub trait TextSimilarity: Send + Sync {
    fn similarity(&self, a: &str, b: &str) -> Result<SimilarityScore>;
}

/// Embedding-backed similarity with a shared cache.
pub struct EmbeddingSimilarity {
    provider: Arc<dyn EmbeddingProvider>,
    cache: EmbeddingCache,
}

impl EmbeddingSimilarity {
    pub fn new(provider: Arc<dyn EmbeddingProvider>, cache_cap: usize) -> Self {
        EmbeddingSimilarity {
            provider,
            cache: EmbeddingCache::new(cache_cap),
        }
    }

    /// Embeds one text through the cache; repeated calls with identical text
    /// return the identical vector.
    pub fn embed(&self, text: &str) -> Result<Arc<EmbeddingVector>> {
        if text.trim().is_empty() {
            return Err(Error::EmptyText);
        }
        if let Some(hit) = self.cache.get(text) {
            return Ok(hit);
        }
        let mut vectors = self.provider.embed_batch(&[text])?;
        let vector = vectors
            .pop()
            .ok_or_else(|| Error::ProviderUnavailable("provider returned no vectors".into()))?;
        Ok(self.cache.insert(text, Arc::new(vector)))
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }
}

impl TextSimilarity for EmbeddingSimilarity {
    fn similarity(&self, a: &str, b: &str) -> Result<SimilarityScore> {
        let va = self.embed(a)?;
        let vb = self.embed(b)?;
        cosine(&va, &vb)
    }
}

/// Token-set Jaccard similarity over lowercased whitespace tokens.
/// Deterministic and hand-computable; used by matcher tests and the CLI's
/// alignment debugging mode.
#[derive(Debug, Clone, Copy, Default)]
pub struct TokenJaccard;

impl TextSimilarity for TokenJaccard {
    fn similarity(&self, a: &str, b: &str) -> Result<SimilarityScore> {
        let set_a: std::collections::HashSet<String> =
            a.to_lowercase().split_whitespace().map(String::from).collect();
        let set_b: std::collections::HashSet<String> =
            b.to_lowercase().split_whitespace().map(String::from).collect();
        let union = set_a.union(&set_b).count();
        if union == 0 {
            return Ok(0.0);
        }
        let intersection = set_a.intersection(&set_b).count();
        Ok(intersection as f64 / union as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn unit_constructor_renormalizes() {
        let v = EmbeddingVector::unit(vec![3.0, 4.0]).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-6);
        assert!((f64::from(v.values()[0]) - 0.6).abs() < 1e-6);
    }

    #[test]
    fn unit_constructor_rejects_zero_vector() {
        assert!(matches!(
            EmbeddingVector::unit(vec![0.0, 0.0]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn cosine_self_similarity_is_one() {
        let v = EmbeddingVector::unit(vec![0.3, -0.2, 0.9]).unwrap();
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cosine_orthogonal_is_zero() {
        let a = EmbeddingVector::unit(vec![1.0, 0.0]).unwrap();
        let b = EmbeddingVector::unit(vec![0.0, 1.0]).unwrap();
        assert_eq!(cosine(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn cosine_hand_example() {
        let a = EmbeddingVector::unit(vec![0.6, 0.8]).unwrap();
        let b = EmbeddingVector::unit(vec![1.0, 0.0]).unwrap();
        assert!((cosine(&a, &b).unwrap() - 0.6).abs() < 1e-7);
    }

    #[test]
    fn cosine_dimension_mismatch() {
        let a = EmbeddingVector::unit(vec![1.0]).unwrap();
        let b = EmbeddingVector::unit(vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            cosine(&a, &b),
            Err(Error::DimensionMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn cosine_is_exactly_symmetric() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a: Vec<f32> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f32> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let va = EmbeddingVector::unit(a).unwrap();
            let vb = EmbeddingVector::unit(b).unwrap();
            assert_eq!(cosine(&va, &vb).unwrap(), cosine(&vb, &va).unwrap());
        }
    }

    #[test]
    fn cached_embed_is_bitwise_identical() {
        let sim = EmbeddingSimilarity::new(Arc::new(LexicalEmbedder), 0);
        let a = sim.embed("abc").unwrap();
        let b = sim.embed("abc").unwrap();
        let bits = |v: &EmbeddingVector| v.values().iter().map(|f| f.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(sim.cache_len(), 1);
    }

    #[test]
    fn embed_rejects_empty_text() {
        let sim = EmbeddingSimilarity::new(Arc::new(LexicalEmbedder), 0);
        assert!(matches!(sim.embed("  "), Err(Error::EmptyText)));
    }

    #[test]
    fn cache_eviction_keeps_determinism() {
        let sim = EmbeddingSimilarity::new(Arc::new(LexicalEmbedder), 2);
        let first = sim.embed("alpha bravo").unwrap();
        sim.embed("charlie delta").unwrap();
        sim.embed("echo foxtrot").unwrap(); // evicts "alpha bravo"
        assert_eq!(sim.cache_len(), 2);
        let again = sim.embed("alpha bravo").unwrap();
        assert_eq!(first.values(), again.values());
    }

    #[test]
    fn cache_is_safe_under_concurrent_use() {
        let sim = Arc::new(EmbeddingSimilarity::new(Arc::new(LexicalEmbedder), 0));
        let mut handles = Vec::new();
        for _ in 0..8 {
            let sim = sim.clone();
            handles.push(std::thread::spawn(move || {
                sim.embed("shared text under contention").unwrap().values().to_vec()
            }));
        }
        let results: Vec<Vec<f32>> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        for window in results.windows(2) {
            assert_eq!(window[0], window[1]);
        }
        assert_eq!(sim.cache_len(), 1);
    }

    #[test]
    fn jaccard_hand_examples() {
        let j = TokenJaccard;
        assert_eq!(j.similarity("a b", "a b c d").unwrap(), 0.5);
        assert_eq!(j.similarity("a b c d", "a b c d").unwrap(), 1.0);
        assert_eq!(j.similarity("a b", "x y").unwrap(), 0.0);
    }
}
