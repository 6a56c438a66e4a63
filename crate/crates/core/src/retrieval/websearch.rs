//! Generic web-search provider (custom-search JSON API shape) and a plain
//! HTTP fetcher with a fixed per-host delay.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::error::{Error, Result};

use super::{Fetcher, SearchHit, SearchProvider, SearchQuery};

/// Environment variable holding the web-search API key.
pub const WEBSEARCH_API_KEY_VAR: &str = "WEBSEARCH_API_KEY";

pub struct WebSearchProvider {
    endpoint: String,
    engine_id: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct SearchResponse {
    items: Option<Vec<SearchItem>>,
}

#[derive(Deserialize)]
struct SearchItem {
    link: String,
    title: Option<String>,
}

impl WebSearchProvider {
    pub fn new(endpoint: impl Into<String>, engine_id: impl Into<String>) -> Self {
        WebSearchProvider {
            endpoint: endpoint.into(),
            engine_id: engine_id.into(),
            api_key: std::env::var(WEBSEARCH_API_KEY_VAR).ok(),
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(30))
                .build()
                .expect("client construction cannot fail with static options"),
        }
    }
}

impl SearchProvider for WebSearchProvider {
    fn search(&self, query: &SearchQuery) -> Result<Vec<SearchHit>> {
        let key = self.api_key.clone().unwrap_or_default();
        let response = self
            .client
            .get(&self.endpoint)
            .query(&[
                ("key", key.as_str()),
                ("cx", self.engine_id.as_str()),
                ("q", query.text.as_str()),
                ("num", &query.max_results.to_string()),
            ])
            .send()
            .map_err(|e| Error::ProviderUnavailable(format!("web search: {e}")))?;
        if !response.status().is_success() {
            return Err(Error::ProviderUnavailable(format!(
                "web search returned {}",
                response.status()
            )));
        }
        let parsed: SearchResponse = response
            .json()
            .map_err(|e| Error::ProviderUnavailable(format!("web search response: {e}")))?;
        Ok(parsed
            .items
            .unwrap_or_default()
            .into_iter()
            .enumerate()
            .map(|(rank, item)| SearchHit {
                url: item.link,
                title: item.title,
                rank,
            })
            .collect())
    }
}

/// Fetches URLs over HTTP, waiting at least `delay` between requests to the
/// same host.
pub struct HttpFetcher {
    client: reqwest::blocking::Client,
    delay: Duration,
    last_request: Mutex<HashMap<String, Instant>>,
}

impl HttpFetcher {
    pub fn new(delay_ms: u64) -> Self {
        HttpFetcher {
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(30))
                .user_agent("retrace/0.1")
                .build()
                .expect("client construction cannot fail with static options"),
            delay: Duration::from_millis(delay_ms),
            last_request: Mutex::new(HashMap::new()),
        }
    }

    fn wait_for_host(&self, url: &str) {
        if self.delay.is_zero() {
            return;
        }
        let host = url
            .split("://")
            .nth(1)
            .and_then(|rest| rest.split('/').next())
            .unwrap_or(url)
            .to_string();
        let wait = {
            let mut last = self.last_request.lock().unwrap();
            let now = Instant::now();
            let wait = last
                .get(&host)
                .and_then(|t| self.delay.checked_sub(now.duration_since(*t)));
            last.insert(host, now + wait.unwrap_or_default());
            wait
        };
        if let Some(wait) = wait {
            std::thread::sleep(wait);
        }
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&self, hit: &SearchHit) -> Result<String> {
        self.wait_for_host(&hit.url);
        let response = self.client.get(&hit.url).send().map_err(|e| Error::FetchFailed {
            url: hit.url.clone(),
            reason: e.to_string(),
        })?;
        if !response.status().is_success() {
            return Err(Error::FetchFailed {
                url: hit.url.clone(),
                reason: format!("status {}", response.status()),
            });
        }
        response.text().map_err(|e| Error::FetchFailed {
            url: hit.url.clone(),
            reason: e.to_string(),
        })
    }
}
