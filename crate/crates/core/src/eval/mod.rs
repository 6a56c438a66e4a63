//! Evaluation harness: dataset I/O, batch scoring through the pipeline,
//! metric computation with per-branch breakdowns, threshold sweeps, the
//! synthetic experiment suite, and the calibrated noisy-oracle fallback
//! used as a reference "existing detector" in offline runs.

mod metrics;
mod synth;

pub use metrics::{
    f_score, incomplete_beta, ln_gamma, paired_t_test, roc_auc, tpr_at_fpr, FScore, TTest,
};
pub use synth::{generate_synthetic_suite, SampleMode, SynthConfig};

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fallback::FallbackDetector;
use crate::hashing::unit_fraction;
use crate::pipeline::{
    measure_regen_similarity, measure_similarity, Branch, Detector, ThresholdConfig, Verdict,
    VerdictLabel,
};
use crate::regen::regenerate;
use crate::retrieval::{extract_candidate, search, CandidateConfig};
use crate::text::{normalize, split_sentences, RawText};

/// Gold label of an evaluation sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoldLabel {
    Human,
    Llm,
}

/// One labeled sample: `{id, text, label, group?}` per line in a UTF-8 file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalSample {
    pub id: String,
    pub text: String,
    pub label: GoldLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

pub fn load_dataset(path: &Path) -> Result<Vec<EvalSample>> {
    let file = std::fs::File::open(path)?;
    let mut samples = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: EvalSample = serde_json::from_str(&line)
            .map_err(|e| Error::Dataset(format!("{}:{} {e}", path.display(), lineno + 1)))?;
        if !seen.insert(sample.id.clone()) {
            return Err(Error::Dataset(format!(
                "duplicate sample id {:?}",
                sample.id
            )));
        }
        samples.push(sample);
    }
    Ok(samples)
}

pub fn save_dataset(samples: &[EvalSample], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    for sample in samples {
        let line = serde_json::to_string(sample)
            .map_err(|e| Error::Dataset(format!("serialize sample: {e}")))?;
        writeln!(file, "{line}")?;
    }
    Ok(())
}

/// A sample scored by the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredRecord {
    pub id: String,
    pub label: GoldLabel,
    pub verdict: VerdictLabel,
    pub branch: Branch,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleError {
    pub id: String,
    pub message: String,
}

/// Verdict counts for one gold label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchCounts {
    pub original: usize,
    pub generated: usize,
    pub deferred: usize,
    pub errors: usize,
}

impl BranchCounts {
    pub fn total(&self) -> usize {
        self.original + self.generated + self.deferred + self.errors
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

/// Full evaluation output. Contains no wall-clock data, so identical seeds
/// and configs serialize byte-identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub samples: usize,
    pub roc_auc: f64,
    pub tpr_at_fpr: f64,
    pub fpr_bound: f64,
    pub f_score: f64,
    pub f_score_undefined: bool,
    pub decision_threshold: f64,
    pub confusion: Confusion,
    pub human_branches: BranchCounts,
    pub llm_branches: BranchCounts,
    pub per_sample: Vec<ScoredRecord>,
    pub errors: Vec<SampleError>,
    pub seed: u64,
    pub config_echo: serde_json::Value,
}

/// Harness knobs.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Worker threads for scoring; 1 runs serially.
    pub parallelism: usize,
    /// Decision threshold on the mapped score for F-score and confusion.
    pub decision_threshold: f64,
    /// FPR bound for the low-FPR operating point.
    pub fpr_bound: f64,
    /// Seed echoed into the report.
    pub seed: u64,
    /// Configuration echoed into the report.
    pub config_echo: serde_json::Value,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            parallelism: 4,
            decision_threshold: 0.5,
            fpr_bound: 0.01,
            seed: 0,
            config_echo: serde_json::Value::Null,
        }
    }
}

/// Scores every sample through `detector.detect` and aggregates metrics and
/// per-branch counts. Per-sample failures are recorded and excluded from
/// the metrics; the run continues.
pub fn run_eval(
    dataset: &[EvalSample],
    detector: &Detector,
    opts: &EvalOptions,
) -> Result<MetricsReport> {
    let has_human = dataset.iter().any(|s| s.label == GoldLabel::Human);
    let has_llm = dataset.iter().any(|s| s.label == GoldLabel::Llm);
    if dataset.is_empty() || !has_human || !has_llm {
        return Err(Error::EmptyClass);
    }

    let outcomes: Vec<std::result::Result<Verdict, String>> = if opts.parallelism <= 1 {
        dataset
            .iter()
            .map(|s| detect_one(detector, s))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.parallelism)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            dataset
                .par_iter()
                .map(|s| detect_one(detector, s))
                .collect()
        })
    };

    let mut per_sample = Vec::with_capacity(dataset.len());
    let mut errors = Vec::new();
    let mut human_branches = BranchCounts::default();
    let mut llm_branches = BranchCounts::default();

    for (sample, outcome) in dataset.iter().zip(outcomes) {
        let counts = match sample.label {
            GoldLabel::Human => &mut human_branches,
            GoldLabel::Llm => &mut llm_branches,
        };
        match outcome {
            Ok(verdict) => {
                match verdict.label {
                    VerdictLabel::Original => counts.original += 1,
                    VerdictLabel::Generated => counts.generated += 1,
                    VerdictLabel::Deferred => counts.deferred += 1,
                }
                per_sample.push(ScoredRecord {
                    id: sample.id.clone(),
                    label: sample.label,
                    verdict: verdict.label,
                    branch: verdict.trail.branch,
                    score: verdict.score,
                });
            }
            Err(message) => {
                counts.errors += 1;
                errors.push(SampleError {
                    id: sample.id.clone(),
                    message,
                });
            }
        }
    }

    let pos: Vec<f64> = per_sample
        .iter()
        .filter(|r| r.label == GoldLabel::Llm)
        .map(|r| r.score)
        .collect();
    let neg: Vec<f64> = per_sample
        .iter()
        .filter(|r| r.label == GoldLabel::Human)
        .map(|r| r.score)
        .collect();

    let auc = roc_auc(&pos, &neg)?;
    let tpr = tpr_at_fpr(&pos, &neg, opts.fpr_bound)?;
    let scored: Vec<(f64, bool)> = per_sample
        .iter()
        .map(|r| (r.score, r.label == GoldLabel::Llm))
        .collect();
    let f = f_score(&scored, opts.decision_threshold)?;

    let mut confusion = Confusion::default();
    for record in &per_sample {
        let predicted = record.score >= opts.decision_threshold;
        match (predicted, record.label) {
            (true, GoldLabel::Llm) => confusion.true_positive += 1,
            (true, GoldLabel::Human) => confusion.false_positive += 1,
            (false, GoldLabel::Llm) => confusion.false_negative += 1,
            (false, GoldLabel::Human) => confusion.true_negative += 1,
        }
    }

    Ok(MetricsReport {
        samples: dataset.len(),
        roc_auc: auc,
        tpr_at_fpr: tpr,
        fpr_bound: opts.fpr_bound,
        f_score: f.value,
        f_score_undefined: f.undefined,
        decision_threshold: opts.decision_threshold,
        confusion,
        human_branches,
        llm_branches,
        per_sample,
        errors,
        seed: opts.seed,
        config_echo: opts.config_echo.clone(),
    })
}

fn detect_one(detector: &Detector, sample: &EvalSample) -> std::result::Result<Verdict, String> {
    detector
        .detect(&RawText::new(sample.id.clone(), &sample.text))
        .map_err(|e| e.to_string())
}

/// Threshold parameter a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Alpha,
    Beta,
    Gamma,
    Delta,
    AnchorFloor,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepParam::Alpha),
            "beta" => Ok(SweepParam::Beta),
            "gamma" => Ok(SweepParam::Gamma),
            "delta" => Ok(SweepParam::Delta),
            "anchor_floor" => Ok(SweepParam::AnchorFloor),
            other => Err(Error::Config(format!("unknown sweep parameter: {other}"))),
        }
    }
}

impl SweepParam {
    pub fn apply(&self, thresholds: &mut ThresholdConfig, value: f64) {
        match self {
            SweepParam::Alpha => thresholds.alpha = value,
            SweepParam::Beta => thresholds.beta = value,
            SweepParam::Gamma => thresholds.gamma = value,
            SweepParam::Delta => thresholds.delta = value,
            SweepParam::AnchorFloor => thresholds.anchor_floor = value,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: SweepParam,
    pub value: f64,
    pub report: MetricsReport,
}

/// Runs one evaluation per parameter value, everything else fixed. The
/// detector is rebuilt per row through `build`.
pub fn sweep<F>(
    param: SweepParam,
    values: &[f64],
    dataset: &[EvalSample],
    base: &ThresholdConfig,
    build: F,
    opts: &EvalOptions,
) -> Result<Vec<SweepRow>>
where
    F: Fn(ThresholdConfig) -> Detector,
{
    values
        .iter()
        .map(|&value| {
            let mut thresholds = base.clone();
            param.apply(&mut thresholds, value);
            let detector = build(thresholds);
            let report = run_eval(dataset, &detector, opts)?;
            Ok(SweepRow {
                parameter: param,
                value,
                report,
            })
        })
        .collect()
}

/// Similarity-shift measurement: for every sample with a candidate, compute
/// the candidate similarity, regenerate unconditionally, and compute the
/// regeneration similarity. This mirrors the offline analysis of how
/// regeneration moves the two classes, independent of the decision branches.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftStats {
    pub human_mean_shift: f64,
    pub llm_mean_shift: f64,
    pub human_count: usize,
    pub llm_count: usize,
    pub per_sample: Vec<(String, GoldLabel, f64)>,
}

pub fn measure_shifts(dataset: &[EvalSample], detector: &Detector) -> Result<ShiftStats> {
    let mut per_sample = Vec::new();
    for sample in dataset {
        let raw = RawText::new(sample.id.clone(), &sample.text);
        let input = match split_sentences(&raw, &detector.segmenter) {
            Ok(seg) => seg,
            Err(_) => continue,
        };
        let hits = search(
            &input,
            detector.search_provider.as_ref(),
            detector.query_token_cap,
            detector.max_results,
        )
        .unwrap_or_default();
        let candidate = hits.iter().find_map(|hit| {
            extract_candidate(
                hit,
                &input,
                detector.similarity.as_ref(),
                detector.fetcher.as_ref(),
                &CandidateConfig {
                    anchor_floor: detector.thresholds.anchor_floor,
                    merge_cap: detector.thresholds.merge_cap,
                    segmenter: detector.segmenter.clone(),
                },
            )
        });
        let Some(candidate) = candidate else { continue };
        let candidate_sim = measure_similarity(
            &candidate.candidate_text,
            &input,
            detector.similarity.as_ref(),
            &detector.thresholds,
            &detector.segmenter,
        )?;
        let Ok(regeneration) = regenerate(
            &candidate.candidate_text,
            detector.llm.as_ref(),
            detector.prompt,
            detector.temperature,
        ) else {
            continue;
        };
        let regen_sim = measure_regen_similarity(
            &regeneration.regenerated_text,
            &input,
            &candidate_sim.filtered_input_indices(),
            detector.similarity.as_ref(),
            &detector.thresholds,
            &detector.segmenter,
        )?;
        per_sample.push((
            sample.id.clone(),
            sample.label,
            regen_sim.mean_similarity - candidate_sim.mean_similarity,
        ));
    }

    let mean_of = |label: GoldLabel| {
        let shifts: Vec<f64> = per_sample
            .iter()
            .filter(|(_, l, _)| *l == label)
            .map(|(_, _, s)| *s)
            .collect();
        if shifts.is_empty() {
            (0.0, 0)
        } else {
            (shifts.iter().sum::<f64>() / shifts.len() as f64, shifts.len())
        }
    };
    let (human_mean_shift, human_count) = mean_of(GoldLabel::Human);
    let (llm_mean_shift, llm_count) = mean_of(GoldLabel::Llm);
    Ok(ShiftStats {
        human_mean_shift,
        llm_mean_shift,
        human_count,
        llm_count,
        per_sample,
    })
}

/// Paired t-test between two evaluation runs over the same dataset.
///
/// The pairing unit is the per-sample mapped score signed by the gold
/// label — the score itself for llm samples, one minus the score for human
/// samples — so a larger value always means "more correct", every sample
/// contributes, and the test asks whether run `a` is systematically more
/// correct than run `b`. Samples are matched by id; both runs must have
/// scored the same samples.
pub fn signed_score_t_test(a: &MetricsReport, b: &MetricsReport) -> Result<TTest> {
    let signed = |record: &ScoredRecord| match record.label {
        GoldLabel::Llm => record.score,
        GoldLabel::Human => 1.0 - record.score,
    };
    let by_id: HashMap<&str, f64> = b
        .per_sample
        .iter()
        .map(|r| (r.id.as_str(), signed(r)))
        .collect();
    let mut series_a = Vec::with_capacity(a.per_sample.len());
    let mut series_b = Vec::with_capacity(a.per_sample.len());
    for record in &a.per_sample {
        let other = by_id.get(record.id.as_str()).ok_or_else(|| {
            Error::Dataset(format!("sample {:?} missing from the other run", record.id))
        })?;
        series_a.push(signed(record));
        series_b.push(*other);
    }
    paired_t_test(&series_a, &series_b)
}

/// Default gold weight of the noisy oracle; places its standalone AUC near
/// 0.70 (P(pos > neg) = 1 − (1 − w/(1−w))²/2 for uniform noise).
pub const NOISY_ORACLE_GOLD_WEIGHT: f64 = 0.184;

/// A seeded reference "existing detector" for offline experiments: emits the
/// gold label blended with per-text uniform noise. With labels it scores
/// `w·gold + (1−w)·u(text)`; without labels it degrades to pure noise
/// around the midpoint.
pub struct NoisyOracle {
    seed: u64,
    gold_weight: f64,
    labels: HashMap<String, bool>,
}

impl NoisyOracle {
    pub fn for_dataset(seed: u64, samples: &[EvalSample]) -> Self {
        let labels = samples
            .iter()
            .map(|s| (normalize(&s.text), s.label == GoldLabel::Llm))
            .collect();
        NoisyOracle {
            seed,
            gold_weight: NOISY_ORACLE_GOLD_WEIGHT,
            labels,
        }
    }

    pub fn label_free(seed: u64) -> Self {
        NoisyOracle {
            seed,
            gold_weight: NOISY_ORACLE_GOLD_WEIGHT,
            labels: HashMap::new(),
        }
    }
}

impl FallbackDetector for NoisyOracle {
    fn score(&self, text: &str) -> Result<f64> {
        let noise = unit_fraction(self.seed, text.as_bytes());
        let gold = self
            .labels
            .get(text)
            .map(|&llm| if llm { 1.0 } else { 0.0 })
            .unwrap_or(0.5);
        Ok((self.gold_weight * gold + (1.0 - self.gold_weight) * noise).clamp(0.0, 1.0))
    }

    fn name(&self) -> String {
        format!("noisy-oracle(seed={})", self.seed)
    }
}
