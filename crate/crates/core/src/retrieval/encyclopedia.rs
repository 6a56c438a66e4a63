//! Encyclopedia search provider speaking the MediaWiki API shape: title
//! search via `opensearch`, plain-text page content via `query&prop=extracts`.
//! The endpoint is configurable so tests can point it at a local server.

use std::time::Duration;

use crate::error::{Error, Result};

use super::{Fetcher, SearchHit, SearchProvider, SearchQuery};

pub struct EncyclopediaProvider {
    endpoint: String,
    client: reqwest::blocking::Client,
}

impl EncyclopediaProvider {
    pub fn new(endpoint: impl Into<String>) -> Self {
        EncyclopediaProvider {
            endpoint: endpoint.into(),
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(30))
                .build()
                .expect("client construction cannot fail with static options"),
        }
    }
}

impl SearchProvider for EncyclopediaProvider {
    fn search(&self, query: &SearchQuery) -> Result<Vec<SearchHit>> {
        let response = self
            .client
            .get(&self.endpoint)
            .query(&[
                ("action", "opensearch"),
                ("search", query.text.as_str()),
                ("limit", &query.max_results.to_string()),
                ("format", "json"),
            ])
            .send()
            .map_err(|e| Error::ProviderUnavailable(format!("encyclopedia search: {e}")))?;
        if !response.status().is_success() {
            return Err(Error::ProviderUnavailable(format!(
                "encyclopedia search returned {}",
                response.status()
            )));
        }
        // Response shape: [query, [titles], [descriptions], [urls]]
        let parsed: serde_json::Value = response
            .json()
            .map_err(|e| Error::ProviderUnavailable(format!("encyclopedia response: {e}")))?;
        let titles = parsed
            .get(1)
            .and_then(|v| v.as_array())
            .cloned()
            .unwrap_or_default();
        let urls = parsed
            .get(3)
            .and_then(|v| v.as_array())
            .cloned()
            .unwrap_or_default();
        Ok(titles
            .iter()
            .enumerate()
            .map(|(rank, title)| {
                let title = title.as_str().unwrap_or_default().to_string();
                let url = urls
                    .get(rank)
                    .and_then(|u| u.as_str())
                    .map(String::from)
                    .unwrap_or_else(|| format!("{}#{}", self.endpoint, title.replace(' ', "_")));
                SearchHit {
                    url,
                    title: Some(title),
                    rank,
                }
            })
            .collect())
    }
}

impl Fetcher for EncyclopediaProvider {
    fn fetch(&self, hit: &SearchHit) -> Result<String> {
        // Prefer the stored title; fall back to the last URL path segment.
        let title = hit
            .title
            .clone()
            .or_else(|| {
                hit.url
                    .rsplit('/')
                    .next()
                    .map(|s| s.replace('_', " "))
            })
            .ok_or_else(|| Error::FetchFailed {
                url: hit.url.clone(),
                reason: "no title to fetch by".into(),
            })?;
        let response = self
            .client
            .get(&self.endpoint)
            .query(&[
                ("action", "query"),
                ("prop", "extracts"),
                ("explaintext", "1"),
                ("format", "json"),
                ("titles", title.as_str()),
            ])
            .send()
            .map_err(|e| Error::FetchFailed {
                url: hit.url.clone(),
                reason: e.to_string(),
            })?;
        if !response.status().is_success() {
            return Err(Error::FetchFailed {
                url: hit.url.clone(),
                reason: format!("status {}", response.status()),
            });
        }
        let parsed: serde_json::Value = response.json().map_err(|e| Error::FetchFailed {
            url: hit.url.clone(),
            reason: e.to_string(),
        })?;
        let extract = parsed
            .pointer("/query/pages")
            .and_then(|pages| pages.as_object())
            .and_then(|pages| pages.values().next())
            .and_then(|page| page.get("extract"))
            .and_then(|e| e.as_str())
            .unwrap_or_default()
            .to_string();
        if extract.is_empty() {
            return Err(Error::FetchFailed {
                url: hit.url.clone(),
                reason: "no extract in response".into(),
            });
        }
        Ok(extract)
    }
}
