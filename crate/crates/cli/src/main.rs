//! Command-line interface wiring configuration, providers, the detection
//! pipeline, and the evaluation harness.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use retrace_core::config::Config;
use retrace_core::eval::{
    generate_synthetic_suite, load_dataset, run_eval, save_dataset, signed_score_t_test, sweep,
    EvalOptions, EvalSample, MetricsReport, NoisyOracle, SweepParam,
};
use retrace_core::fallback::{ConstantFallback, FallbackDetector, HttpFallback, SubprocessFallback};
use retrace_core::matcher::{match_texts, matched_text};
use retrace_core::pipeline::{Detector, Verdict, VerdictLabel};
use retrace_core::regen::{HttpLlm, LlmProvider, MockParaphraser, PromptTemplate, PromptVerb};
use retrace_core::retrieval::{
    EncyclopediaProvider, Fetcher, HttpFetcher, LocalCorpus, LocalFetcher, LocalIndex, NullFetcher,
    SearchProvider, WebSearchProvider, ZeroHitProvider,
};
use retrace_core::similarity::{
    EmbeddingSimilarity, HttpEmbedder, LexicalEmbedder, TextSimilarity, TokenJaccard,
};
use retrace_core::text::{segment, RawText};

#[derive(Parser)]
#[command(
    name = "retrace",
    version,
    about = "Detects LLM-paraphrased text by retrieving candidate sources and probing regeneration similarity"
)]
struct Cli {
    /// Path to a TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one config key (repeatable), e.g. --set alpha=0.97.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Search provider: local, encyclopedia, or websearch.
    #[arg(long, global = true)]
    provider: Option<String>,

    /// Regenerator: mock or http.
    #[arg(long, global = true)]
    regenerator: Option<String>,

    /// Fallback detector: noisy-oracle, constant:X, subprocess:CMD, http:URL.
    #[arg(long, global = true)]
    fallback: Option<String>,

    /// Seed for the suite, mock paraphraser, and noisy oracle.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for evaluate/sweep.
    #[arg(long, global = true)]
    parallelism: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one text as Original, Generated, or Deferred.
    Detect {
        /// Text to classify; use --file or stdin for longer inputs.
        #[arg(long, conflicts_with = "file")]
        text: Option<String>,
        /// Read the input text from a file.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Exit nonzero when the verdict is Generated (CI-style gating).
        #[arg(long)]
        gate: bool,
    },
    /// Score a labeled dataset and write metric reports.
    Evaluate {
        /// Line-delimited dataset: {"id", "text", "label", "group"?}.
        dataset: PathBuf,
        /// Directory for report.json and report.txt.
        #[arg(long, default_value = "eval-out")]
        out: PathBuf,
        /// Run the fallback detector alone (zero-hit search) for comparison.
        #[arg(long)]
        without_search: bool,
        /// Paired t-test of this run against a stored report.json.
        #[arg(long, value_name = "REPORT_JSON")]
        compare: Option<PathBuf>,
    },
    /// Re-run the evaluation over a range of one threshold parameter.
    Sweep {
        dataset: PathBuf,
        /// Parameter: alpha, beta, gamma, delta, or anchor_floor.
        #[arg(long)]
        parameter: String,
        /// Comma-separated values, e.g. 0.9,0.95,0.99. "inf" is accepted.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Output file for one JSON row per value.
        #[arg(long, default_value = "sweep.jsonl")]
        out: PathBuf,
    },
    /// Show the sentence alignment between two texts.
    MatchDebug {
        input: PathBuf,
        source: PathBuf,
        /// Use token-Jaccard similarity instead of the configured embedder.
        #[arg(long)]
        jaccard: bool,
    },
    /// Generate the synthetic corpus and dataset.
    Synth {
        /// Directory for corpus.jsonl and dataset.jsonl.
        #[arg(long, default_value = "synth-out")]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let exit = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    };
    std::process::exit(exit);
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let config = resolve_config(&cli)?;
    match &cli.command {
        Command::Detect { text, file, gate } => {
            cmd_detect(&cli, &config, text.as_deref(), file.as_deref(), *gate)
        }
        Command::Evaluate {
            dataset,
            out,
            without_search,
            compare,
        } => cmd_evaluate(&cli, &config, dataset, out, *without_search, compare.as_deref()),
        Command::Sweep {
            dataset,
            parameter,
            values,
            out,
        } => cmd_sweep(&cli, &config, dataset, parameter, values, out),
        Command::MatchDebug {
            input,
            source,
            jaccard,
        } => cmd_match_debug(&config, input, source, *jaccard),
        Command::Synth { out } => cmd_synth(&config, out),
    }
}

/// Precedence: dedicated flag > --set > config file > default.
fn resolve_config(cli: &Cli) -> anyhow::Result<Config> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => Config::default(),
    };
    for pair in &cli.overrides {
        let (key, value) = pair
            .split_once('=')
            .with_context(|| format!("--set {pair}: expected KEY=VALUE"))?;
        config.set(key.trim(), value.trim())?;
    }
    if let Some(provider) = &cli.provider {
        config.provider = provider.clone();
    }
    if let Some(regenerator) = &cli.regenerator {
        config.regenerator = regenerator.clone();
    }
    if let Some(fallback) = &cli.fallback {
        config.fallback = fallback.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(parallelism) = cli.parallelism {
        config.parallelism = parallelism;
    }
    Ok(config)
}

/// Builds the pipeline from config. `dataset` supplies gold labels to the
/// noisy-oracle fallback in evaluation runs; `zero_hits` swaps the search
/// provider out for the fallback-only comparison.
fn build_detector(
    config: &Config,
    dataset: Option<&[EvalSample]>,
    zero_hits: bool,
) -> anyhow::Result<Detector> {
    let similarity: Arc<dyn TextSimilarity> = match config.embedder.as_str() {
        "lexical" => Arc::new(EmbeddingSimilarity::new(
            Arc::new(LexicalEmbedder),
            config.cache_cap,
        )),
        "http" => Arc::new(EmbeddingSimilarity::new(
            Arc::new(HttpEmbedder::new(
                &config.embedding_endpoint,
                &config.embedding_model,
            )),
            config.cache_cap,
        )),
        "jaccard" => Arc::new(TokenJaccard),
        other => bail!("unknown embedder: {other}"),
    };

    let (search_provider, fetcher): (Arc<dyn SearchProvider>, Arc<dyn Fetcher>) = if zero_hits {
        (Arc::new(ZeroHitProvider), Arc::new(NullFetcher))
    } else {
        match config.provider.as_str() {
            "local" => {
                let corpus = Arc::new(
                    LocalCorpus::load(Path::new(&config.corpus_path))
                        .with_context(|| format!("loading corpus {}", config.corpus_path))?,
                );
                (
                    Arc::new(LocalIndex::new(corpus.clone())),
                    Arc::new(LocalFetcher::new(corpus)),
                )
            }
            "encyclopedia" => {
                let provider = Arc::new(EncyclopediaProvider::new(&config.encyclopedia_endpoint));
                (
                    provider.clone() as Arc<dyn SearchProvider>,
                    provider as Arc<dyn Fetcher>,
                )
            }
            "websearch" => (
                Arc::new(WebSearchProvider::new(
                    &config.websearch_endpoint,
                    &config.websearch_engine_id,
                )),
                Arc::new(HttpFetcher::new(config.fetch_delay_ms)),
            ),
            other => bail!("unknown provider: {other}"),
        }
    };

    let llm: Arc<dyn LlmProvider> = match config.regenerator.as_str() {
        "mock" => Arc::new(MockParaphraser::new(config.seed)),
        "http" => Arc::new(HttpLlm::new(&config.llm_endpoint, &config.llm_model)),
        other => bail!("unknown regenerator: {other}"),
    };

    let fallback: Arc<dyn FallbackDetector> = match config.fallback.as_str() {
        "noisy-oracle" => match dataset {
            Some(samples) => Arc::new(NoisyOracle::for_dataset(config.seed, samples)),
            None => Arc::new(NoisyOracle::label_free(config.seed)),
        },
        spec if spec.starts_with("constant:") => {
            let value: f64 = spec["constant:".len()..]
                .parse()
                .with_context(|| format!("fallback {spec}"))?;
            Arc::new(ConstantFallback(value))
        }
        spec if spec.starts_with("subprocess:") => {
            Arc::new(SubprocessFallback::new(&spec["subprocess:".len()..]))
        }
        spec if spec.starts_with("http:") => Arc::new(HttpFallback::new(&spec["http:".len()..])),
        other => bail!("unknown fallback: {other}"),
    };

    Ok(Detector {
        search_provider,
        fetcher,
        similarity,
        llm,
        fallback,
        thresholds: config.thresholds(),
        prompt: PromptTemplate {
            verb: PromptVerb::parse(&config.prompt_verb)?,
        },
        temperature: config.temperature(),
        segmenter: config.segmenter(),
        max_results: config.max_results,
        query_token_cap: config.query_token_cap,
    })
}

fn cmd_detect(
    cli: &Cli,
    config: &Config,
    text: Option<&str>,
    file: Option<&Path>,
    gate: bool,
) -> anyhow::Result<i32> {
    let content = match (text, file) {
        (Some(t), _) => t.to_string(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?,
        (None, None) => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .context("reading stdin")?;
            buf
        }
    };
    if content.trim().is_empty() {
        bail!("input text is empty");
    }
    let detector = build_detector(config, None, false)?;
    let verdict = detector.detect(&RawText::new("cli-input", &content))?;

    match cli.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&verdict)?),
        Format::Text => print_verdict(&verdict),
    }

    Ok(if gate && verdict.label == VerdictLabel::Generated {
        2
    } else {
        0
    })
}

fn print_verdict(verdict: &Verdict) {
    println!("label:      {}", verdict.label);
    println!("confidence: {:.4}", verdict.confidence);
    println!("score:      {:.4}", verdict.score);
    println!("branch:     {:?}", verdict.trail.branch);
    match (&verdict.trail.candidate_url, verdict.trail.candidate_rank) {
        (Some(url), Some(rank)) => println!(
            "candidate:  {url} (rank {rank}, anchor {:.4})",
            verdict.trail.anchor_similarity.unwrap_or(0.0)
        ),
        _ => println!("candidate:  -"),
    }
    match &verdict.trail.candidate_report {
        Some(report) => println!(
            "cand_sim:   {:.4} (coverage {:.2}, {}/{} pairs kept)",
            report.mean_similarity,
            report.covered_input_ratio,
            report.filtered_pairs.len(),
            report.total_pairs
        ),
        None => println!("cand_sim:   -"),
    }
    match &verdict.trail.regeneration_report {
        Some(report) => println!("regen_sim:  {:.4}", report.mean_similarity),
        None => println!("regen_sim:  -"),
    }
    match verdict.trail.fallback_score {
        Some(score) => println!("fallback:   {score:.4}"),
        None => println!("fallback:   -"),
    }
    println!("time:       {} ms", verdict.trail.timings.total_ms);
}

fn eval_options(config: &Config) -> anyhow::Result<EvalOptions> {
    Ok(EvalOptions {
        parallelism: config.parallelism,
        decision_threshold: config.decision_threshold,
        fpr_bound: config.fpr_bound,
        seed: config.seed,
        config_echo: serde_json::to_value(config)?,
    })
}

fn cmd_evaluate(
    cli: &Cli,
    config: &Config,
    dataset_path: &Path,
    out: &Path,
    without_search: bool,
    compare: Option<&Path>,
) -> anyhow::Result<i32> {
    let dataset = load_dataset(dataset_path)?;
    let detector = build_detector(config, Some(&dataset), without_search)?;
    let report = run_eval(&dataset, &detector, &eval_options(config)?)?;

    std::fs::create_dir_all(out)?;
    let json_path = out.join("report.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&report)?)?;
    let text_path = out.join("report.txt");
    std::fs::write(&text_path, render_report(&report))?;

    match cli.format {
        Format::Json => println!("{}", serde_json::to_string(&report)?),
        Format::Text => {
            print!("{}", render_report(&report));
            println!(
                "reports written to {} and {}",
                json_path.display(),
                text_path.display()
            );
        }
    }

    if let Some(other_path) = compare {
        let other: MetricsReport = serde_json::from_str(
            &std::fs::read_to_string(other_path)
                .with_context(|| format!("reading {}", other_path.display()))?,
        )?;
        let test = signed_score_t_test(&report, &other)?;
        println!(
            "paired t-test vs {}: t = {:.4}, two-sided p = {:.6}",
            other_path.display(),
            test.t_statistic,
            test.p_value
        );
    }
    Ok(0)
}

fn render_report(report: &MetricsReport) -> String {
    let mut out = String::new();
    let mut line = |label: &str, value: String| {
        out.push_str(&format!("{label:<22}{value}\n"));
    };
    line("samples", report.samples.to_string());
    line("roc_auc", format!("{:.4}", report.roc_auc));
    line(
        &format!("tpr@fpr({})", report.fpr_bound),
        format!("{:.4}", report.tpr_at_fpr),
    );
    line(
        "f_score",
        format!(
            "{:.4} (threshold {:.2}{})",
            report.f_score,
            report.decision_threshold,
            if report.f_score_undefined {
                ", undefined"
            } else {
                ""
            }
        ),
    );
    line(
        "confusion",
        format!(
            "tp={} fp={} tn={} fn={}",
            report.confusion.true_positive,
            report.confusion.false_positive,
            report.confusion.true_negative,
            report.confusion.false_negative
        ),
    );
    line(
        "branches (human)",
        format!(
            "original={} generated={} deferred={} errors={}",
            report.human_branches.original,
            report.human_branches.generated,
            report.human_branches.deferred,
            report.human_branches.errors
        ),
    );
    line(
        "branches (llm)",
        format!(
            "original={} generated={} deferred={} errors={}",
            report.llm_branches.original,
            report.llm_branches.generated,
            report.llm_branches.deferred,
            report.llm_branches.errors
        ),
    );
    line("seed", report.seed.to_string());
    out
}

fn cmd_sweep(
    cli: &Cli,
    config: &Config,
    dataset_path: &Path,
    parameter: &str,
    values: &[f64],
    out: &Path,
) -> anyhow::Result<i32> {
    let dataset = load_dataset(dataset_path)?;
    let param: SweepParam = parameter.parse()?;
    let opts = eval_options(config)?;
    let rows = sweep(
        param,
        values,
        &dataset,
        &config.thresholds(),
        |thresholds| {
            let mut detector = build_detector(config, Some(&dataset), false)
                .expect("base detector built before sweeping");
            detector.thresholds = thresholds;
            detector
        },
        &opts,
    )?;

    let mut lines = String::new();
    for row in &rows {
        lines.push_str(&serde_json::to_string(row)?);
        lines.push('\n');
    }
    std::fs::write(out, &lines)?;

    match cli.format {
        Format::Json => print!("{lines}"),
        Format::Text => {
            println!("{:<14}{:<10}{:<10}f", "value", "auc", "tpr");
            for row in &rows {
                println!(
                    "{:<14}{:<10.4}{:<10.4}{:.4}",
                    row.value, row.report.roc_auc, row.report.tpr_at_fpr, row.report.f_score
                );
            }
            println!("rows written to {}", out.display());
        }
    }
    Ok(0)
}

fn cmd_match_debug(
    config: &Config,
    input_path: &Path,
    source_path: &Path,
    jaccard: bool,
) -> anyhow::Result<i32> {
    let input_text = std::fs::read_to_string(input_path)
        .with_context(|| format!("reading {}", input_path.display()))?;
    let source_text = std::fs::read_to_string(source_path)
        .with_context(|| format!("reading {}", source_path.display()))?;
    let segmenter = config.segmenter();
    let input = segment("input", &input_text, &segmenter)?;
    let source = segment("source", &source_text, &segmenter)?;

    let similarity: Arc<dyn TextSimilarity> = if jaccard {
        Arc::new(TokenJaccard)
    } else {
        Arc::new(EmbeddingSimilarity::new(
            Arc::new(LexicalEmbedder),
            config.cache_cap,
        ))
    };

    let matching = match_texts(&input, &source, similarity.as_ref(), config.merge_cap)?;
    println!(
        "anchor: source sentence {} (similarity {:.4}), {} source sentences dropped",
        matching.anchor_index, matching.anchor_similarity, matching.unmatched_source_prefix_dropped
    );
    for (i, pair) in matching.pairs.iter().enumerate() {
        println!(
            "pair {i}: sim {:.4}\n  input  [{}..{}]: {}\n  source [{}..{}]: {}",
            pair.similarity,
            pair.input.start,
            pair.input.end,
            input.join_range(pair.input.start, pair.input.end),
            pair.source.start,
            pair.source.end,
            source.join_range(pair.source.start, pair.source.end),
        );
    }
    if matching.unmatched_input.is_empty() {
        println!("unmatched input: none");
    } else {
        for &idx in &matching.unmatched_input {
            println!("unmatched input [{idx}]: {}", input.sentences[idx].text);
        }
    }
    println!("candidate text: {}", matched_text(&matching, &source));
    Ok(0)
}

fn cmd_synth(config: &Config, out: &Path) -> anyhow::Result<i32> {
    let synth_config = config.synth()?;
    let (docs, samples) = generate_synthetic_suite(&synth_config);
    std::fs::create_dir_all(out)?;
    let corpus_path = out.join("corpus.jsonl");
    let dataset_path = out.join("dataset.jsonl");
    LocalCorpus::save(&docs, &corpus_path)?;
    save_dataset(&samples, &dataset_path)?;
    println!(
        "wrote {} corpus records to {} and {} samples to {}",
        docs.len(),
        corpus_path.display(),
        samples.len(),
        dataset_path.display()
    );
    Ok(0)
}
