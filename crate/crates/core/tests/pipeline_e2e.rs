//! Cross-module integration checks: sweep equivalences on the synthetic
//! suite and the matcher's similarity-call budget under a merge cap.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use retrace_core::error::Result;
use retrace_core::eval::{
    generate_synthetic_suite, run_eval, sweep, EvalOptions, SampleMode, SweepParam, SynthConfig,
};
use retrace_core::eval::NoisyOracle;
use retrace_core::matcher::match_texts;
use retrace_core::pipeline::{Detector, ThresholdConfig};
use retrace_core::regen::{MockParaphraser, PromptTemplate};
use retrace_core::retrieval::{LocalCorpus, LocalFetcher, LocalIndex};
use retrace_core::similarity::{EmbeddingSimilarity, LexicalEmbedder, TextSimilarity};
use retrace_core::text::{segment, SegmenterOptions};

fn suite(seed: u64) -> (Arc<LocalCorpus>, Vec<retrace_core::eval::EvalSample>) {
    let (docs, samples) = generate_synthetic_suite(&SynthConfig {
        docs: 40,
        mode: SampleMode::Split,
        seed,
        ..SynthConfig::default()
    });
    (Arc::new(LocalCorpus::from_docs(docs)), samples)
}

fn detector(
    corpus: Arc<LocalCorpus>,
    seed: u64,
    samples: &[retrace_core::eval::EvalSample],
    thresholds: ThresholdConfig,
) -> Detector {
    Detector {
        search_provider: Arc::new(LocalIndex::new(corpus.clone())),
        fetcher: Arc::new(LocalFetcher::new(corpus)),
        similarity: Arc::new(EmbeddingSimilarity::new(Arc::new(LexicalEmbedder), 0)),
        llm: Arc::new(MockParaphraser::new(seed)),
        fallback: Arc::new(NoisyOracle::for_dataset(seed, samples)),
        thresholds,
        prompt: PromptTemplate::default(),
        temperature: None,
        segmenter: SegmenterOptions::default(),
        max_results: 3,
        query_token_cap: 32,
    }
}

// An infinite delta and a disabled delta branch must produce identical
// evaluations: neither can ever declare a sample generated.
#[test]
fn infinite_delta_sweep_row_equals_delta_ablation() {
    let seed = 23;
    let (corpus, samples) = suite(seed);
    let opts = EvalOptions {
        parallelism: 2,
        seed,
        ..EvalOptions::default()
    };

    let rows = sweep(
        SweepParam::Delta,
        &[f64::INFINITY],
        &samples,
        &ThresholdConfig::default(),
        |thresholds| detector(corpus.clone(), seed, &samples, thresholds),
        &opts,
    )
    .unwrap();
    assert_eq!(rows.len(), 1);

    let ablated = ThresholdConfig {
        enable_delta: false,
        ..ThresholdConfig::default()
    };
    let ablated_report = run_eval(
        &samples,
        &detector(corpus.clone(), seed, &samples, ablated),
        &opts,
    )
    .unwrap();

    assert_eq!(
        serde_json::to_vec(&rows[0].report).unwrap(),
        serde_json::to_vec(&ablated_report).unwrap(),
        "delta=inf must match the delta ablation exactly"
    );
}

#[test]
fn alpha_sweep_is_structural_and_deterministic() {
    let seed = 29;
    let (corpus, samples) = suite(seed);
    let opts = EvalOptions {
        parallelism: 2,
        seed,
        ..EvalOptions::default()
    };
    let run = || {
        sweep(
            SweepParam::Alpha,
            &[0.0, 0.99],
            &samples,
            &ThresholdConfig::default(),
            |thresholds| detector(corpus.clone(), seed, &samples, thresholds),
            &opts,
        )
        .unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first.len(), 2);
    assert_eq!(
        serde_json::to_vec(&first).unwrap(),
        serde_json::to_vec(&second).unwrap()
    );
}

/// Counts similarity calls and distinct argument texts.
struct CountingSim<S> {
    inner: S,
    calls: AtomicUsize,
    distinct: Mutex<HashSet<String>>,
}

impl<S: TextSimilarity> TextSimilarity for CountingSim<S> {
    fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let mut distinct = self.distinct.lock().unwrap();
        distinct.insert(a.to_string());
        distinct.insert(b.to_string());
        drop(distinct);
        self.inner.similarity(a, b)
    }
}

#[test]
fn matcher_call_budget_and_cache_growth() {
    let opts = SegmenterOptions {
        min_sentence_tokens: 0,
        ..SegmenterOptions::default()
    };
    let input_items: Vec<String> = (0..5).map(|i| format!("ia{i} ib{i}.")).collect();
    let source_items: Vec<String> = (0..7).map(|i| format!("sa{i} sb{i}.")).collect();
    let input = segment("i", &input_items.join("\n\n"), &opts).unwrap();
    let source = segment("s", &source_items.join("\n\n"), &opts).unwrap();

    for cap in [1usize, 2, 3] {
        let embedding = EmbeddingSimilarity::new(Arc::new(LexicalEmbedder), 0);
        let counting = CountingSim {
            inner: embedding,
            calls: AtomicUsize::new(0),
            distinct: Mutex::new(HashSet::new()),
        };
        let matching = match_texts(&input, &source, &counting, cap).unwrap();

        // Anchor scans every source sentence once; each greedy step then
        // evaluates at most 2·cap candidates.
        let steps = matching.pairs.len();
        let calls = counting.calls.load(Ordering::SeqCst);
        assert!(
            calls <= source.len() + steps * 2 * cap,
            "cap {cap}: {calls} calls for {steps} steps"
        );
        assert!(steps <= input.len().min(source.len()));

        // Every embedded text is either a sentence of one side or a merged
        // segment that some step actually formed.
        let distinct = counting.distinct.lock().unwrap();
        let singles: HashSet<&String> = input_items.iter().chain(&source_items).collect();
        let merged = distinct.iter().filter(|t| !singles.contains(t)).count();
        assert!(
            distinct.len() <= input.len() + source.len() + merged,
            "cap {cap}: {} distinct texts",
            distinct.len()
        );
    }
}
