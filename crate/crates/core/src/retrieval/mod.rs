//! Candidate-source retrieval: search providers, URL content fetching and
//! extraction, and candidate extraction against the input text.

mod corpus;
mod encyclopedia;
mod extract;
mod websearch;

pub use corpus::{CorpusDoc, LocalCorpus, LocalFetcher, LocalIndex};
pub use encyclopedia::EncyclopediaProvider;
pub use extract::extract_text;
pub use websearch::{HttpFetcher, WebSearchProvider, WEBSEARCH_API_KEY_VAR};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcher::{match_texts, matched_text, Matching};
use crate::similarity::TextSimilarity;
use crate::text::{split_sentences, RawText, SegmentedText, SegmenterOptions};

/// A single provider query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchQuery {
    pub text: String,
    pub max_results: usize,
}

/// One ranked search result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub url: String,
    pub title: Option<String>,
    pub rank: usize,
}

/// A retrieved document aligned against the input, with the concatenated
/// matched segments that serve as the candidate text.
#[derive(Debug, Clone)]
pub struct CandidateSource {
    pub hit: SearchHit,
    pub source_segmented: SegmentedText,
    pub matching: Matching,
    pub candidate_text: String,
}

/// Ranked search over some backend.
pub trait SearchProvider: Send + Sync {
    fn search(&self, query: &SearchQuery) -> Result<Vec<SearchHit>>;
}

/// Resolves a hit to its raw document body.
pub trait Fetcher: Send + Sync {
    fn fetch(&self, hit: &SearchHit) -> Result<String>;
}

/// Builds the provider query for an input: its first sentence truncated to
/// `token_cap` whitespace tokens. One query is issued per sample.
pub fn build_query(input: &SegmentedText, token_cap: usize, max_results: usize) -> SearchQuery {
    let first = input
        .sentences
        .first()
        .map(|s| s.text.as_str())
        .unwrap_or_default();
    let text = first
        .split_whitespace()
        .take(token_cap)
        .collect::<Vec<_>>()
        .join(" ");
    SearchQuery { text, max_results }
}

/// Issues exactly one provider query for the input. An empty hit list is not
/// an error; the pipeline defers to the fallback detector.
pub fn search(
    input: &SegmentedText,
    provider: &dyn SearchProvider,
    token_cap: usize,
    max_results: usize,
) -> Result<Vec<SearchHit>> {
    if input.is_empty() {
        return Err(Error::EmptyInput);
    }
    let query = build_query(input, token_cap, max_results);
    let mut hits = provider.search(&query)?;
    hits.truncate(max_results);
    // Normalize ranks to provider order.
    for (rank, hit) in hits.iter_mut().enumerate() {
        hit.rank = rank;
    }
    Ok(hits)
}

/// Fetches the hit and reduces it to normalized visible text.
pub fn fetch_and_extract(hit: &SearchHit, fetcher: &dyn Fetcher) -> Result<RawText> {
    let body = fetcher.fetch(hit)?;
    let raw = RawText::new(hit.url.clone(), &extract_text(&body));
    if raw.content.is_empty() {
        return Err(Error::ExtractEmpty);
    }
    Ok(raw)
}

/// A search provider that never returns hits. Degrades the pipeline to its
/// fallback detector; used by `--without-search` comparison runs.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroHitProvider;

impl SearchProvider for ZeroHitProvider {
    fn search(&self, _query: &SearchQuery) -> Result<Vec<SearchHit>> {
        Ok(Vec::new())
    }
}

/// Companion to [`ZeroHitProvider`]; fails every fetch.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullFetcher;

impl Fetcher for NullFetcher {
    fn fetch(&self, hit: &SearchHit) -> Result<String> {
        Err(Error::FetchFailed {
            url: hit.url.clone(),
            reason: "null fetcher".into(),
        })
    }
}

/// Knobs for candidate acceptance.
#[derive(Debug, Clone)]
pub struct CandidateConfig {
    /// Minimum anchor similarity for a source to count as a candidate.
    pub anchor_floor: f64,
    /// Merge window for the matcher; 0 = unbounded.
    pub merge_cap: usize,
    pub segmenter: SegmenterOptions,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        CandidateConfig {
            anchor_floor: 0.5,
            merge_cap: 0,
            segmenter: SegmenterOptions::default(),
        }
    }
}

/// Fetches, segments, and aligns one hit against the input. All failures —
/// fetch errors, empty extractions, a weak anchor, an empty matching — map
/// to `None` so the caller advances to the next hit.
pub fn extract_candidate(
    hit: &SearchHit,
    input: &SegmentedText,
    sim: &dyn TextSimilarity,
    fetcher: &dyn Fetcher,
    cfg: &CandidateConfig,
) -> Option<CandidateSource> {
    let raw = fetch_and_extract(hit, fetcher).ok()?;
    let source = split_sentences(&raw, &cfg.segmenter).ok()?;
    let matching = match_texts(input, &source, sim, cfg.merge_cap).ok()?;
    if matching.anchor_similarity < cfg.anchor_floor || matching.pairs.is_empty() {
        return None;
    }
    let candidate_text = matched_text(&matching, &source);
    Some(CandidateSource {
        hit: hit.clone(),
        source_segmented: source,
        matching,
        candidate_text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::TokenJaccard;
    use crate::text::segment;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    struct FailingFetcher;
    impl Fetcher for FailingFetcher {
        fn fetch(&self, hit: &SearchHit) -> Result<String> {
            Err(Error::FetchFailed {
                url: hit.url.clone(),
                reason: "offline".into(),
            })
        }
    }

    struct FixedFetcher(String);
    impl Fetcher for FixedFetcher {
        fn fetch(&self, _hit: &SearchHit) -> Result<String> {
            Ok(self.0.clone())
        }
    }

    /// Counts provider calls; used to assert the one-query budget.
    pub struct CountingProvider<P> {
        inner: P,
        pub calls: Arc<AtomicUsize>,
    }

    impl<P: SearchProvider> SearchProvider for CountingProvider<P> {
        fn search(&self, query: &SearchQuery) -> Result<Vec<SearchHit>> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            self.inner.search(query)
        }
    }

    fn hit(url: &str) -> SearchHit {
        SearchHit {
            url: url.into(),
            title: None,
            rank: 0,
        }
    }

    fn opts() -> SegmenterOptions {
        SegmenterOptions::default()
    }

    #[test]
    fn query_uses_first_sentence_capped() {
        let input = segment("t", "one two three four five. Second sentence here.", &opts()).unwrap();
        let q = build_query(&input, 3, 5);
        assert_eq!(q.text, "one two three");
        assert_eq!(q.max_results, 5);
    }

    #[test]
    fn search_counts_one_provider_call() {
        let corpus = Arc::new(LocalCorpus::from_docs(vec![CorpusDoc {
            id: "d".into(),
            url: "corpus://d".into(),
            text: "alpha beta gamma delta".into(),
        }]));
        let calls = Arc::new(AtomicUsize::new(0));
        let provider = CountingProvider {
            inner: LocalIndex::new(corpus),
            calls: calls.clone(),
        };
        let input = segment("t", "alpha beta gamma delta.", &opts()).unwrap();
        let hits = search(&input, &provider, 32, 3).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn fetch_and_extract_strips_markup() {
        let fetcher = FixedFetcher("<p>Hello <b>world</b>.</p>".into());
        let raw = fetch_and_extract(&hit("x://y"), &fetcher).unwrap();
        assert_eq!(raw.content, "Hello world.");
        assert_eq!(raw.source_id, "x://y");
    }

    #[test]
    fn fetch_and_extract_script_only_is_empty() {
        let fetcher = FixedFetcher("<script>nothing()</script>".into());
        assert!(matches!(
            fetch_and_extract(&hit("x://y"), &fetcher),
            Err(Error::ExtractEmpty)
        ));
    }

    #[test]
    fn candidate_identity_round_trip() {
        let doc = "Alpha bravo charlie. Delta echo foxtrot.";
        let input = segment("t", doc, &opts()).unwrap();
        let fetcher = FixedFetcher(doc.into());
        let candidate =
            extract_candidate(&hit("x://a"), &input, &TokenJaccard, &fetcher, &CandidateConfig::default())
                .expect("candidate expected");
        assert_eq!(candidate.candidate_text, doc);
        assert_eq!(candidate.matching.pairs.len(), 2);
        assert_eq!(candidate.matching.anchor_similarity, 1.0);
    }

    #[test]
    fn candidate_rejected_below_anchor_floor() {
        let input = segment("t", "alpha bravo charlie delta.", &opts()).unwrap();
        let fetcher = FixedFetcher("zulu yankee xray whiskey. victor uniform tango sierra.".into());
        assert!(extract_candidate(
            &hit("x://a"),
            &input,
            &TokenJaccard,
            &fetcher,
            &CandidateConfig::default()
        )
        .is_none());
    }

    #[test]
    fn candidate_none_on_fetch_error() {
        let input = segment("t", "alpha bravo charlie delta.", &opts()).unwrap();
        assert!(extract_candidate(
            &hit("x://a"),
            &input,
            &TokenJaccard,
            &FailingFetcher,
            &CandidateConfig::default()
        )
        .is_none());
    }
}
