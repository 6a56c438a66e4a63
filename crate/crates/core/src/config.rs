//! Flat, typed configuration. Every key can come from a TOML file and be
//! overridden individually with `--set key=value`; precedence is
//! flag > config file > default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{SampleMode, SynthConfig};
use crate::pipeline::ThresholdConfig;
use crate::text::{SegmenterOptions, DEFAULT_ABBREVIATIONS};

/// Default seed; drives the synthetic suite, the mock paraphraser, and the
/// noisy-oracle fallback. Frozen after calibrating the noisy oracle's
/// standalone AUC to land at 0.70 on the default suite.
pub const DEFAULT_SEED: u64 = 47;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    // Decision thresholds.
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub anchor_floor: f64,
    pub enable_alpha: bool,
    pub enable_beta_filter: bool,
    pub enable_delta: bool,
    pub regen_fresh_filter: bool,
    pub merge_cap: usize,

    // Retrieval.
    pub provider: String,
    pub corpus_path: String,
    pub max_results: usize,
    pub query_token_cap: usize,
    pub encyclopedia_endpoint: String,
    pub websearch_endpoint: String,
    pub websearch_engine_id: String,
    pub fetch_delay_ms: u64,

    // Segmentation.
    pub min_sentence_tokens: usize,
    pub abbreviations: Vec<String>,

    // Similarity.
    pub embedder: String,
    pub embedding_endpoint: String,
    pub embedding_model: String,
    pub cache_cap: usize,

    // Regeneration.
    pub regenerator: String,
    pub llm_endpoint: String,
    pub llm_model: String,
    /// Negative means "use the provider default".
    pub llm_temperature: f64,
    pub prompt_verb: String,

    // Fallback adapter: "noisy-oracle", "constant:X", "subprocess:CMD",
    // or "http:URL".
    pub fallback: String,

    // Evaluation.
    pub parallelism: usize,
    pub seed: u64,
    pub decision_threshold: f64,
    pub fpr_bound: f64,

    // Synthetic suite.
    pub synth_docs: usize,
    pub synth_noise_rate: f64,
    pub synth_sentences_min: usize,
    pub synth_sentences_max: usize,
    pub synth_mode: String,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            alpha: 0.99,
            beta: 0.86,
            gamma: 0.5,
            delta: 0.01,
            anchor_floor: 0.5,
            enable_alpha: true,
            enable_beta_filter: true,
            enable_delta: true,
            regen_fresh_filter: false,
            merge_cap: 0,
            provider: "local".into(),
            corpus_path: "corpus.jsonl".into(),
            max_results: 3,
            query_token_cap: 32,
            encyclopedia_endpoint: "https://en.wikipedia.org/w/api.php".into(),
            websearch_endpoint: "https://www.googleapis.com/customsearch/v1".into(),
            websearch_engine_id: String::new(),
            fetch_delay_ms: 0,
            min_sentence_tokens: 2,
            abbreviations: DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect(),
            embedder: "lexical".into(),
            embedding_endpoint: String::new(),
            embedding_model: String::new(),
            cache_cap: 0,
            regenerator: "mock".into(),
            llm_endpoint: String::new(),
            llm_model: String::new(),
            llm_temperature: -1.0,
            prompt_verb: "paraphrase".into(),
            fallback: "noisy-oracle".into(),
            parallelism: 4,
            seed: DEFAULT_SEED,
            decision_threshold: 0.5,
            fpr_bound: 0.01,
            synth_docs: 200,
            synth_noise_rate: 0.05,
            synth_sentences_min: 8,
            synth_sentences_max: 12,
            synth_mode: "paired".into(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&raw).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Applies one `key=value` override with per-key typing.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse()
                .map_err(|e| Error::Config(format!("{key}={value}: {e}")))
        }
        match key {
            "alpha" => self.alpha = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "anchor_floor" => self.anchor_floor = parse(key, value)?,
            "enable_alpha" => self.enable_alpha = parse(key, value)?,
            "enable_beta_filter" => self.enable_beta_filter = parse(key, value)?,
            "enable_delta" => self.enable_delta = parse(key, value)?,
            "regen_fresh_filter" => self.regen_fresh_filter = parse(key, value)?,
            "merge_cap" => self.merge_cap = parse(key, value)?,
            "provider" => self.provider = value.into(),
            "corpus_path" => self.corpus_path = value.into(),
            "max_results" => self.max_results = parse(key, value)?,
            "query_token_cap" => self.query_token_cap = parse(key, value)?,
            "encyclopedia_endpoint" => self.encyclopedia_endpoint = value.into(),
            "websearch_endpoint" => self.websearch_endpoint = value.into(),
            "websearch_engine_id" => self.websearch_engine_id = value.into(),
            "fetch_delay_ms" => self.fetch_delay_ms = parse(key, value)?,
            "min_sentence_tokens" => self.min_sentence_tokens = parse(key, value)?,
            "abbreviations" => {
                self.abbreviations = value.split(',').map(|s| s.trim().to_string()).collect()
            }
            "embedder" => self.embedder = value.into(),
            "embedding_endpoint" => self.embedding_endpoint = value.into(),
            "embedding_model" => self.embedding_model = value.into(),
            "cache_cap" => self.cache_cap = parse(key, value)?,
            "regenerator" => self.regenerator = value.into(),
            "llm_endpoint" => self.llm_endpoint = value.into(),
            "llm_model" => self.llm_model = value.into(),
            "llm_temperature" => self.llm_temperature = parse(key, value)?,
            "prompt_verb" => self.prompt_verb = value.into(),
            "fallback" => self.fallback = value.into(),
            "parallelism" => self.parallelism = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "decision_threshold" => self.decision_threshold = parse(key, value)?,
            "fpr_bound" => self.fpr_bound = parse(key, value)?,
            "synth_docs" => self.synth_docs = parse(key, value)?,
            "synth_noise_rate" => self.synth_noise_rate = parse(key, value)?,
            "synth_sentences_min" => self.synth_sentences_min = parse(key, value)?,
            "synth_sentences_max" => self.synth_sentences_max = parse(key, value)?,
            "synth_mode" => self.synth_mode = value.into(),
            other => return Err(Error::Config(format!("unknown config key: {other}"))),
        }
        Ok(())
    }

    pub fn thresholds(&self) -> ThresholdConfig {
        ThresholdConfig {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            delta: self.delta,
            anchor_floor: self.anchor_floor,
            enable_alpha: self.enable_alpha,
            enable_beta_filter: self.enable_beta_filter,
            enable_delta: self.enable_delta,
            regen_fresh_filter: self.regen_fresh_filter,
            merge_cap: self.merge_cap,
        }
    }

    pub fn segmenter(&self) -> SegmenterOptions {
        SegmenterOptions {
            abbreviations: self.abbreviations.clone(),
            min_sentence_tokens: self.min_sentence_tokens,
        }
    }

    pub fn synth(&self) -> Result<SynthConfig> {
        let mode = match self.synth_mode.as_str() {
            "paired" => SampleMode::Paired,
            "split" => SampleMode::Split,
            other => return Err(Error::Config(format!("unknown synth_mode: {other}"))),
        };
        Ok(SynthConfig {
            docs: self.synth_docs,
            noise_rate: self.synth_noise_rate,
            sentences_min: self.synth_sentences_min,
            sentences_max: self.synth_sentences_max,
            mode,
            seed: self.seed,
        })
    }

    pub fn temperature(&self) -> Option<f64> {
        (self.llm_temperature >= 0.0).then_some(self.llm_temperature)
    }
}
