//! HTTP embedding provider.
//!
//! Single endpoint; the request body carries `{"model": ..., "input": [..]}`
//! and the response `{"data": [{"embedding": [..]}, ..]}` in input order.
//! The API key is read from the `EMBEDDING_API_KEY` environment variable.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{EmbeddingProvider, EmbeddingVector};

/// Environment variable holding the embedding API key.
pub const EMBEDDING_API_KEY_VAR: &str = "EMBEDDING_API_KEY";

pub struct HttpEmbedder {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    input: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    data: Vec<EmbedItem>,
}

#[derive(Deserialize)]
struct EmbedItem {
    embedding: Vec<f32>,
}

impl HttpEmbedder {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        HttpEmbedder {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: std::env::var(EMBEDDING_API_KEY_VAR).ok(),
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(60))
                .build()
                .expect("client construction cannot fail with static options"),
        }
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        let body = EmbedRequest {
            model: &self.model,
            input: texts,
        };
        let mut request = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request
            .send()
            .map_err(|e| Error::ProviderUnavailable(format!("embedding request: {e}")))?;
        if !response.status().is_success() {
            return Err(Error::ProviderUnavailable(format!(
                "embedding endpoint returned {}",
                response.status()
            )));
        }
        let parsed: EmbedResponse = response
            .json()
            .map_err(|e| Error::ProviderUnavailable(format!("embedding response: {e}")))?;
        if parsed.data.len() != texts.len() {
            return Err(Error::ProviderUnavailable(format!(
                "expected {} embeddings, got {}",
                texts.len(),
                parsed.data.len()
            )));
        }
        parsed
            .data
            .into_iter()
            .map(|item| EmbeddingVector::unit(item.embedding))
            .collect()
    }
}
