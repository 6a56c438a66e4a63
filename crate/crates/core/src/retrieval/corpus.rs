//! Line-delimited local corpus, overlap-ranked search over it, and the
//! identity fetcher. A deterministic, hand-verifiable stand-in for a web
//! search engine.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Fetcher, SearchHit, SearchProvider, SearchQuery};

/// One corpus record: `{id, url, text}` per line in a UTF-8 file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CorpusDoc {
    pub id: String,
    pub url: String,
    pub text: String,
}

/// An in-memory corpus with URL lookup.
pub struct LocalCorpus {
    docs: Vec<CorpusDoc>,
    by_url: HashMap<String, usize>,
}

impl LocalCorpus {
    pub fn from_docs(docs: Vec<CorpusDoc>) -> Self {
        let by_url = docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.url.clone(), i))
            .collect();
        LocalCorpus { docs, by_url }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut docs = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let doc: CorpusDoc = serde_json::from_str(&line).map_err(|e| {
                Error::Dataset(format!("{}:{} {e}", path.display(), lineno + 1))
            })?;
            docs.push(doc);
        }
        Ok(Self::from_docs(docs))
    }

    pub fn save(docs: &[CorpusDoc], path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        for doc in docs {
            let line = serde_json::to_string(doc)
                .map_err(|e| Error::Dataset(format!("serialize corpus record: {e}")))?;
            writeln!(file, "{line}")?;
        }
        Ok(())
    }

    pub fn docs(&self) -> &[CorpusDoc] {
        &self.docs
    }

    pub fn get_by_url(&self, url: &str) -> Option<&CorpusDoc> {
        self.by_url.get(url).map(|&i| &self.docs[i])
    }
}

fn token_set(text: &str) -> HashSet<String> {
    text.to_lowercase().split_whitespace().map(String::from).collect()
}

/// Search over the local corpus. Score = |query tokens ∩ doc tokens| /
/// |query tokens| on lowercased token sets; zero-score documents never
/// rank; ties break by document id.
pub struct LocalIndex {
    corpus: Arc<LocalCorpus>,
}

impl LocalIndex {
    pub fn new(corpus: Arc<LocalCorpus>) -> Self {
        LocalIndex { corpus }
    }
}

impl SearchProvider for LocalIndex {
    fn search(&self, query: &SearchQuery) -> Result<Vec<SearchHit>> {
        let query_tokens = token_set(&query.text);
        if query_tokens.is_empty() {
            return Ok(Vec::new());
        }
        let mut scored: Vec<(f64, &CorpusDoc)> = self
            .corpus
            .docs
            .iter()
            .filter_map(|doc| {
                let doc_tokens = token_set(&doc.text);
                let overlap = query_tokens.intersection(&doc_tokens).count();
                if overlap == 0 {
                    None
                } else {
                    Some((overlap as f64 / query_tokens.len() as f64, doc))
                }
            })
            .collect();
        scored.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.1.id.cmp(&b.1.id))
        });
        Ok(scored
            .into_iter()
            .take(query.max_results)
            .enumerate()
            .map(|(rank, (_, doc))| SearchHit {
                url: doc.url.clone(),
                title: Some(doc.id.clone()),
                rank,
            })
            .collect())
    }
}

/// Identity fetcher: returns the stored text of the corpus document at the
/// hit's URL, verbatim.
pub struct LocalFetcher {
    corpus: Arc<LocalCorpus>,
}

impl LocalFetcher {
    pub fn new(corpus: Arc<LocalCorpus>) -> Self {
        LocalFetcher { corpus }
    }
}

impl Fetcher for LocalFetcher {
    fn fetch(&self, hit: &SearchHit) -> Result<String> {
        self.corpus
            .get_by_url(&hit.url)
            .map(|doc| doc.text.clone())
            .ok_or_else(|| Error::FetchFailed {
                url: hit.url.clone(),
                reason: "not in corpus".into(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Arc<LocalCorpus> {
        Arc::new(LocalCorpus::from_docs(vec![
            CorpusDoc {
                id: "a".into(),
                url: "corpus://a".into(),
                text: "the quick brown fox jumps over the lazy dog".into(),
            },
            CorpusDoc {
                id: "b".into(),
                url: "corpus://b".into(),
                text: "pack my box with five dozen liquor jugs".into(),
            },
            CorpusDoc {
                id: "c".into(),
                url: "corpus://c".into(),
                text: "the five boxing wizards jump quickly tonight".into(),
            },
        ]))
    }

    /// Brute-force overlap scan used as the ranking oracle.
    fn oracle_best(corpus: &LocalCorpus, query: &str) -> String {
        let q = token_set(query);
        let mut best: Option<(f64, String)> = None;
        for doc in corpus.docs() {
            let d = token_set(&doc.text);
            let score = q.intersection(&d).count() as f64 / q.len() as f64;
            match &best {
                Some((s, id)) if *s > score || (*s == score && *id < doc.id) => {}
                _ => best = Some((score, doc.id.clone())),
            }
        }
        best.unwrap().1
    }

    #[test]
    fn exact_source_ranks_first() {
        let c = corpus();
        let index = LocalIndex::new(c.clone());
        let query = SearchQuery {
            text: "the quick brown fox jumps over the lazy dog".into(),
            max_results: 3,
        };
        let hits = index.search(&query).unwrap();
        assert_eq!(hits[0].url, "corpus://a");
        assert_eq!(hits[0].rank, 0);
        assert_eq!(oracle_best(&c, &query.text), "a");
    }

    #[test]
    fn zero_overlap_returns_empty_list() {
        let index = LocalIndex::new(corpus());
        let query = SearchQuery {
            text: "zzz qqq www".into(),
            max_results: 3,
        };
        assert!(index.search(&query).unwrap().is_empty());
    }

    #[test]
    fn max_results_truncates() {
        let index = LocalIndex::new(corpus());
        let query = SearchQuery {
            text: "the five".into(),
            max_results: 1,
        };
        let hits = index.search(&query).unwrap();
        assert_eq!(hits.len(), 1);
    }

    #[test]
    fn ranking_is_deterministic() {
        let index = LocalIndex::new(corpus());
        let query = SearchQuery {
            text: "the quick five box".into(),
            max_results: 3,
        };
        let a = index.search(&query).unwrap();
        let b = index.search(&query).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn local_fetcher_returns_stored_text() {
        let c = corpus();
        let fetcher = LocalFetcher::new(c.clone());
        let hit = SearchHit {
            url: "corpus://b".into(),
            title: None,
            rank: 0,
        };
        assert_eq!(fetcher.fetch(&hit).unwrap(), c.docs()[1].text);
    }

    #[test]
    fn roundtrip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let docs = corpus().docs().to_vec();
        LocalCorpus::save(&docs, &path).unwrap();
        let reloaded = LocalCorpus::load(&path).unwrap();
        assert_eq!(reloaded.docs(), docs.as_slice());
    }
}
