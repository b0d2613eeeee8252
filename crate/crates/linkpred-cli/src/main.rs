//! Command line front end: ingest edge lists into instances, run predictors,
//! score them, and benchmark scaling on synthetic graphs.
//!
//! Exit codes: 0 success, 2 usage or input problems (bad flags, malformed
//! files, unknown predictors), 1 compute failures (divergent series, size
//! guards, eigensolver non-convergence).

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use linkpred::dataset::{
    build_instance, downsample_top_degree, load_instance, parse_edge_list_path, save_instance,
    split_by_cutoff, split_two_snapshot, Delimiter, EdgeRecord, FormatSpec, InstanceManifest,
    InstanceStats, LinkPredictionInstance, RecordSplit, SplitSpec,
};
use linkpred::eval::{
    choose_k, evaluate, fit_log_log_exponent, format_report_table, read_predictions, write_predictions,
    write_report, EvaluationReport, KPolicy,
};
use linkpred::predictors::{embed, euclidean_rank, PredictorParams, Registry};
use linkpred::spectral::EigenOptions;
use linkpred::{Error, Result};

#[derive(Parser)]
#[command(
    name = "linkpred",
    version,
    about = "Link prediction on large sparse graphs",
    propagate_version = true
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse edge lists, split train/test, and write an instance directory.
    Ingest(IngestArgs),
    /// Run one predictor on an instance and write ranked predictions.
    Predict(PredictArgs),
    /// Score predictors or prediction files against held-out links.
    Evaluate(EvaluateArgs),
    /// Time embedding and search stages on synthetic graphs of doubling size.
    Bench(BenchArgs),
}

#[derive(Args)]
struct FormatArgs {
    /// Column separator: a single character, or one of `tab`, `comma`,
    /// `space`. Default: any run of whitespace.
    #[arg(long)]
    delimiter: Option<String>,
    /// 0-based column of the first endpoint.
    #[arg(long, default_value_t = 0)]
    u_col: usize,
    /// 0-based column of the second endpoint.
    #[arg(long, default_value_t = 1)]
    v_col: usize,
    /// 0-based column of the integer timestamp, if any.
    #[arg(long)]
    ts_col: Option<usize>,
}

impl FormatArgs {
    fn to_spec(&self) -> Result<FormatSpec> {
        let delimiter = match self.delimiter.as_deref() {
            None => Delimiter::Whitespace,
            Some("tab") => Delimiter::Char('\t'),
            Some("comma") => Delimiter::Char(','),
            Some("space") => Delimiter::Char(' '),
            Some(s) => {
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => Delimiter::Char(c),
                    _ => {
                        return Err(Error::config(format!(
                            "--delimiter must be one character (or tab/comma/space), got {s:?}"
                        )))
                    }
                }
            }
        };
        Ok(FormatSpec {
            delimiter,
            u_column: self.u_col,
            v_column: self.v_col,
            timestamp_column: self.ts_col,
        })
    }
}

#[derive(Args)]
struct IngestArgs {
    /// Edge list to train on (all records in single-file modes).
    #[arg(long)]
    input: PathBuf,
    /// Second edge list holding the later snapshot; its new pairs become
    /// the held-out links.
    #[arg(long)]
    test_input: Option<PathBuf>,
    #[command(flatten)]
    format: FormatArgs,
    /// Records with timestamp at or below this value train; the rest test.
    #[arg(long)]
    cutoff: Option<i64>,
    /// Fraction of time-ordered records that train; the rest test.
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Keep only this fraction of highest-degree training vertices.
    #[arg(long)]
    downsample: Option<f64>,
    /// Instance directory to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScoreKind {
    Euclid,
    Cosine,
}

/// Flags shared by every predictor-running subcommand.
#[derive(Args)]
struct PredictorOpts {
    /// Embedding dimension for spectral predictors (a trailing number on
    /// the predictor name, e.g. spec_euclid16, overrides this).
    #[arg(long, default_value_t = 8)]
    dim: usize,
    /// Path-counting decay of the katz predictor.
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    /// Restart probability of the rooted_pagerank predictor.
    #[arg(long, default_value_t = 0.15)]
    alpha: f64,
    /// Eigensolver residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Seed for the eigensolver's start block.
    #[arg(long, default_value_t = 0x5EED)]
    seed: u64,
    /// Vertex limit for predictors that build dense n-by-n kernels.
    #[arg(long, default_value_t = 5000)]
    dense_guard: usize,
    /// Permit requesting more pairs than the training graph has edges.
    #[arg(long)]
    allow_large_k: bool,
}

impl PredictorOpts {
    fn to_params(&self) -> PredictorParams {
        PredictorParams {
            dim: self.dim,
            beta: self.beta,
            alpha: self.alpha,
            dense_guard: self.dense_guard,
            eigen: EigenOptions {
                tol: self.tol,
                seed: self.seed,
                ..EigenOptions::default()
            },
            allow_large_k: self.allow_large_k,
        }
    }
}

#[derive(Args)]
struct KArgs {
    /// Predict exactly this many links.
    #[arg(long)]
    k: Option<usize>,
    /// `ten-percent` of the held-out links (the default when the instance
    /// has a test set), or `fixed` with --k.
    #[arg(long, value_parser = ["ten-percent", "fixed"])]
    k_policy: Option<String>,
}

impl KArgs {
    fn resolve(&self, instance: &LinkPredictionInstance) -> Result<usize> {
        let policy = match (self.k_policy.as_deref(), self.k) {
            (Some("fixed") | None, Some(k)) => KPolicy::Fixed(k),
            (Some("fixed"), None) => {
                return Err(Error::config("--k-policy fixed requires --k"))
            }
            (Some("ten-percent"), _) | (None, None) => KPolicy::TenPercent,
            (Some(other), _) => {
                return Err(Error::config(format!("unknown k policy {other:?}")))
            }
        };
        if policy == KPolicy::TenPercent && instance.test_links.is_empty() {
            return Err(Error::config(
                "instance has no held-out links; choose k explicitly with --k",
            ));
        }
        Ok(choose_k(instance, policy))
    }
}

#[derive(Args)]
struct PredictArgs {
    /// Instance directory written by `ingest`.
    #[arg(long)]
    instance: PathBuf,
    /// Predictor name (see `--predictor help` for the list).
    #[arg(long)]
    predictor: Option<String>,
    /// Shorthand for the spectral predictor with this score type.
    #[arg(long, value_enum)]
    score: Option<ScoreKind>,
    #[command(flatten)]
    opts: PredictorOpts,
    #[command(flatten)]
    k: KArgs,
    /// Predictions file to write (default: predictions_<name>.tsv in the
    /// instance directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the training graph's spectral embedding here (binary when
    /// the extension is .bin, text otherwise).
    #[arg(long)]
    emit_embedding: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Instance directory written by `ingest`.
    #[arg(long)]
    instance: PathBuf,
    /// Predictor to run, time, and score; repeatable.
    #[arg(long = "predictor")]
    predictors: Vec<String>,
    /// Existing predictions file to score; repeatable.
    #[arg(long = "predictions")]
    prediction_files: Vec<PathBuf>,
    #[command(flatten)]
    opts: PredictorOpts,
    #[command(flatten)]
    k: KArgs,
    /// Report file to write (default: report.tsv in the instance directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Vertex count of the smallest synthetic graph.
    #[arg(long, default_value_t = 1 << 12)]
    start_vertices: usize,
    /// How many times to double the size beyond the first graph.
    #[arg(long, default_value_t = 4)]
    doublings: usize,
    /// Edges each new vertex attaches with.
    #[arg(long, default_value_t = 10)]
    edges_per_vertex: usize,
    /// Embedding dimension.
    #[arg(long, default_value_t = 8)]
    dim: usize,
    /// Pairs to retrieve per graph (default: vertices / 10).
    #[arg(long)]
    k: Option<usize>,
    /// Synthetic graph seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Eigensolver residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Timing table to write, as TSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Sidecar describing one prediction run, written next to the predictions.
#[derive(Serialize, Deserialize)]
struct PredictionMeta {
    predictor: String,
    k_requested: usize,
    k_predicted: usize,
    seconds: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Ingest(args) => run_ingest(args),
        Command::Predict(args) => run_predict(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Bench(args) => run_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

fn warn(msg: impl std::fmt::Display) {
    eprintln!("warning: {msg}");
}

fn parse_input(path: &Path, format: &FormatSpec) -> Result<Vec<EdgeRecord>> {
    let parsed = parse_edge_list_path(path, format)?;
    if parsed.lines_skipped > 0 {
        warn(format!(
            "{}: skipped {} comment/blank line(s)",
            path.display(),
            parsed.lines_skipped
        ));
    }
    if parsed.self_loops_discarded > 0 {
        warn(format!(
            "{}: discarded {} self-loop(s)",
            path.display(),
            parsed.self_loops_discarded
        ));
    }
    Ok(parsed.records)
}

fn run_ingest(args: IngestArgs) -> Result<()> {
    let format = args.format.to_spec()?;
    let records = parse_input(&args.input, &format)?;

    let (split_spec, split) = match (&args.test_input, args.cutoff, args.train_fraction) {
        (Some(test_path), None, None) => {
            let late = parse_input(test_path, &format)?;
            (SplitSpec::TwoSnapshot, split_two_snapshot(records, late))
        }
        (None, Some(cutoff), None) => {
            let spec = SplitSpec::CutoffTime { cutoff };
            let split = split_by_cutoff(records, &spec)?;
            (spec, split)
        }
        (None, None, Some(train_fraction)) => {
            let spec = SplitSpec::Fraction { train_fraction };
            let split = split_by_cutoff(records, &spec)?;
            (spec, split)
        }
        _ => {
            return Err(Error::config(
                "choose exactly one split: --test-input, --cutoff, or --train-fraction",
            ))
        }
    };
    let RecordSplit { mut train, test } = split;
    if test.is_empty() {
        warn("the test side of the split is empty; evaluation will need --k");
    }
    if let Some(fraction) = args.downsample {
        train = downsample_top_degree(&train, fraction)?;
    }

    let (instance, stats) = build_instance(&train, &test)?;
    let manifest = InstanceManifest {
        sources: std::iter::once(&args.input)
            .chain(args.test_input.iter())
            .map(|p| p.display().to_string())
            .collect(),
        split: split_spec,
        downsample_fraction: args.downsample,
        stats,
    };
    save_instance(&args.out, &instance, &manifest)?;
    print!("{}", format_stats(&manifest.stats));
    println!("instance written to {}", args.out.display());
    Ok(())
}

fn format_stats(s: &InstanceStats) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "training graph:    {} vertices, {} edges, average degree {:.2}\n",
        s.full_vertices, s.full_edges, s.full_avg_degree
    ));
    out.push_str(&format!(
        "largest component: {} vertices, {} edges, average degree {:.2}\n",
        s.lcc_vertices, s.lcc_edges, s.lcc_avg_degree
    ));
    out.push_str(&format!(
        "held-out links:    {} kept of {} test records\n",
        s.test_links, s.test_records
    ));
    let drops = [
        (s.test_dropped_unknown_vertex, "unknown vertex"),
        (s.test_dropped_outside_component, "outside component"),
        (s.test_dropped_training_edge, "already a training edge"),
        (s.test_dropped_duplicate, "duplicate"),
    ];
    for (count, reason) in drops {
        if count > 0 {
            out.push_str(&format!("                   dropped {count}: {reason}\n"));
        }
    }
    out
}

/// Effective spectral dimension of a constructed predictor: trailing digits
/// of its resolved name (spec_euclid16 embeds in 16 dimensions regardless of
/// --dim).
fn effective_dim(predictor_name: &str, fallback: usize) -> usize {
    let digits: String = predictor_name
        .chars()
        .rev()
        .take_while(|c| c.is_ascii_digit())
        .collect();
    digits
        .chars()
        .rev()
        .collect::<String>()
        .parse()
        .unwrap_or(fallback)
}

fn run_predict(args: PredictArgs) -> Result<()> {
    let (instance, _manifest) = load_instance(&args.instance)?;
    let name = match (&args.predictor, args.score) {
        (Some(name), None) => name.clone(),
        (None, Some(ScoreKind::Euclid)) => "spec_euclid".to_string(),
        (None, Some(ScoreKind::Cosine)) => "spec_cosine".to_string(),
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "--score is shorthand for the spectral predictors; drop it when naming --predictor",
            ))
        }
        (None, None) => {
            return Err(Error::config(format!(
                "no predictor chosen; pass --predictor with one of: {}",
                Registry::with_defaults().names().join(", ")
            )))
        }
    };
    let params = args.opts.to_params();
    let predictor = Registry::with_defaults().create(&name, &params)?;
    let k = args.k.resolve(&instance)?;

    let started = Instant::now();
    let predictions = predictor.predict(&instance.train, k)?;
    let seconds = started.elapsed().as_secs_f64();
    if predictions.len() < k {
        warn(format!(
            "{} produced {} of {} requested pairs (score support exhausted)",
            predictor.name(),
            predictions.len(),
            k
        ));
    }

    let out = args.out.unwrap_or_else(|| {
        args.instance
            .join(format!("predictions_{}.tsv", predictor.name()))
    });
    write_predictions(&out, &predictions, &instance.labels)?;
    let meta = PredictionMeta {
        predictor: predictor.name(),
        k_requested: k,
        k_predicted: predictions.len(),
        seconds,
    };
    let meta_path = out.with_extension("meta.json");
    let json = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::input(format!("sidecar serialization failed: {e}")))?;
    std::fs::write(&meta_path, json + "\n").map_err(|e| Error::io(&meta_path, e))?;

    if let Some(emb_path) = &args.emit_embedding {
        let dim = effective_dim(&predictor.name(), params.dim);
        let embedding = embed(&instance.train, dim, &params.eigen)?;
        match emb_path.extension().and_then(|e| e.to_str()) {
            Some("bin") => linkpred::spectral::io::write_binary(emb_path, &embedding)?,
            _ => linkpred::spectral::io::write_text(emb_path, &embedding)?,
        }
        println!("embedding written to {}", emb_path.display());
    }

    println!(
        "{}: {} pairs in {seconds:.3} s, written to {}",
        predictor.name(),
        predictions.len(),
        out.display()
    );
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    if args.predictors.is_empty() && args.prediction_files.is_empty() {
        return Err(Error::config(
            "nothing to evaluate; pass --predictor and/or --predictions",
        ));
    }
    let (instance, _manifest) = load_instance(&args.instance)?;
    if instance.test_links.is_empty() {
        return Err(Error::config(
            "instance has no held-out links; evaluation is meaningless",
        ));
    }
    let params = args.opts.to_params();
    let registry = Registry::with_defaults();
    let mut rows: Vec<EvaluationReport> = Vec::new();

    for name in &args.predictors {
        let predictor = registry.create(name, &params)?;
        let k = args.k.resolve(&instance)?;
        let started = Instant::now();
        let predictions = predictor.predict(&instance.train, k)?;
        let seconds = started.elapsed().as_secs_f64();
        if predictions.len() < k {
            warn(format!(
                "{} produced {} of {} requested pairs",
                predictor.name(),
                predictions.len(),
                k
            ));
        }
        rows.push(evaluate(
            &predictor.name(),
            &predictions,
            &instance,
            seconds,
        )?);
    }

    for path in &args.prediction_files {
        let predictions = read_predictions(path, &instance)?;
        let meta_path = path.with_extension("meta.json");
        let (name, seconds) = match std::fs::read_to_string(&meta_path) {
            Ok(json) => {
                let meta: PredictionMeta = serde_json::from_str(&json)
                    .map_err(|e| Error::input(format!("{}: {e}", meta_path.display())))?;
                (meta.predictor, meta.seconds)
            }
            Err(_) => {
                let stem = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("predictions")
                    .to_string();
                warn(format!(
                    "{}: no sidecar; reporting name {stem:?} with zero time",
                    path.display()
                ));
                (stem, 0.0)
            }
        };
        rows.push(evaluate(&name, &predictions, &instance, seconds)?);
    }

    let out = args.out.unwrap_or_else(|| args.instance.join("report.tsv"));
    write_report(&out, &rows)?;
    print!("{}", format_report_table(&rows));
    println!("report written to {}", out.display());
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let opts = EigenOptions {
        tol: args.tol,
        ..EigenOptions::default()
    };
    let mut sizes = Vec::new();
    let mut edge_counts = Vec::new();
    let mut embed_times = Vec::new();
    let mut search_times = Vec::new();
    println!("vertices\tedges\tembed_s\tsearch_s");
    for step in 0..=args.doublings {
        let n = args.start_vertices << step;
        let graph = linkpred::synth::preferential_attachment(n, args.edges_per_vertex, args.seed);
        let k = args.k.unwrap_or(n / 10).max(1);

        let started = Instant::now();
        let embedding = embed(&graph, args.dim, &opts)?;
        let embed_s = started.elapsed().as_secs_f64();

        let excluded: HashSet<(u32, u32)> = graph.edges().collect();
        let started = Instant::now();
        let predictions = euclidean_rank(&embedding, &excluded, k)?;
        let search_s = started.elapsed().as_secs_f64();
        assert_eq!(predictions.len(), k.min(max_k(&graph)));

        println!("{n}\t{}\t{embed_s:.3}\t{search_s:.3}", graph.edge_count());
        sizes.push(n);
        edge_counts.push(graph.edge_count() as f64);
        embed_times.push(embed_s);
        search_times.push(search_s);
    }
    let embed_exp = fit_log_log_exponent(&edge_counts, &embed_times);
    let search_exp = fit_log_log_exponent(&edge_counts, &search_times);
    println!("embedding stage: seconds ~ edges^{embed_exp:.2}");
    println!("search stage:    seconds ~ edges^{search_exp:.2}");

    if let Some(out) = &args.out {
        let mut text = String::from("vertices\tedges\tembed_seconds\tsearch_seconds\n");
        for i in 0..sizes.len() {
            text.push_str(&format!(
                "{}\t{}\t{:?}\t{:?}\n",
                sizes[i], edge_counts[i] as usize, embed_times[i], search_times[i]
            ));
        }
        text.push_str(&format!(
            "# embed_exponent\t{embed_exp:?}\n# search_exponent\t{search_exp:?}\n"
        ));
        std::fs::write(out, text).map_err(|e| Error::io(out, e))?;
        println!("timings written to {}", out.display());
    }
    Ok(())
}

/// Number of non-edges, capped at usize.
fn max_k(graph: &linkpred::graph::Graph) -> usize {
    let n = graph.vertex_count();
    n * (n - 1) / 2 - graph.edge_count()
}
