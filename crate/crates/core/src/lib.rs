//! Retrieval-backed detection of LLM-paraphrased text.
//!
//! Given an input text, the pipeline retrieves candidate source documents
//! from a search provider, greedily aligns them against the input sentence
//! by sentence, regenerates text from the best candidate through a language
//! model, and classifies from the similarity shift — declaring the input
//! original when it tracks a verifiable source closely, generated when
//! regeneration snaps the candidate back onto the input, and deferring
//! undecidable cases to any existing detector behind an adapter.
//!
//! The crate is provider-agnostic: search, fetching, embeddings, the
//! regeneration model, and the fallback detector are all trait objects with
//! both HTTP and deterministic offline implementations, so the whole
//! pipeline runs and tests without a network.

pub mod config;
pub mod error;
pub mod eval;
pub mod fallback;
pub mod hashing;
pub mod matcher;
pub mod pipeline;
pub mod regen;
pub mod retrieval;
pub mod similarity;
pub mod text;

pub use config::Config;
pub use error::{Error, Result};
pub use pipeline::{Detector, Verdict, VerdictLabel};
