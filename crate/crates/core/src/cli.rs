//! The `seednmf` command line: `generate`, `fit`, `evaluate`, `topics`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;
use serde_json::Value;

use crate::corpus::{self, SeedSet, TokenizedCorpus, Vocabulary};
use crate::error::Error;
use crate::eval;
use crate::io::{self, ModelExport, RunSummary};
use crate::solver::{self, ConstraintSpec, FitConfig, FitOutcome, HUpdate};
use crate::sparse::DocTermMatrix;
use crate::synth::{self, GroundTruth, SyntheticSpec};

#[derive(Debug, Parser)]
#[command(name = "seednmf", version, about = "Seed-guided constrained NMF for minority topic discovery")]
#[command(args_override_self = true)]
pub struct Cli {
    /// JSON file of defaults whose keys are flag names (e.g. "theta-min");
    /// flags given on the command line win.
    #[arg(long, global = true, value_name = "JSON")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a synthetic benchmark by injecting topic words into background documents.
    Generate(GenerateArgs),
    /// Fit a constrained (or classical) KL-NMF model.
    Fit(FitArgs),
    /// Score a fitted model against ground-truth labels and topic distributions.
    Evaluate(EvaluateArgs),
    /// List the highest-weight terms of every topic.
    Topics(TopicsArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Benchmark spec JSON; defaults to the bundled 18-topic spec.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Background corpus, one whitespace-tokenized document per line; defaults to the bundled one.
    #[arg(long)]
    pub background: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Overrides the spec's rng_seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weighting {
    Tfidf,
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelFormat {
    Json,
    Tsv,
    Both,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Seed words, one per line. Required unless `--classical` or `--minority 0`.
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub topics: usize,
    /// Minority topics K_MH; defaults to ceil(K/3).
    #[arg(long)]
    pub minority: Option<usize>,
    #[arg(long, default_value_t = 0.4)]
    pub theta_min: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub w_max: f64,
    #[arg(long, default_value_t = 0.001)]
    pub eta: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = HUpdateArg::Auto)]
    pub h_update: HUpdateArg,
    /// Run unconstrained KL-NMF.
    #[arg(long)]
    pub classical: bool,
    #[arg(long, value_enum, default_value_t = Weighting::Tfidf)]
    pub weighting: Weighting,
    #[arg(long, default_value_t = 0.0)]
    pub min_df: f64,
    #[arg(long, default_value_t = 1.0)]
    pub max_df: f64,
    /// Independent fits with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long, value_enum, default_value_t = ModelFormat::Json)]
    pub format: ModelFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HUpdateArg {
    V1,
    V2,
    Auto,
}

impl From<HUpdateArg> for HUpdate {
    fn from(a: HUpdateArg) -> Self {
        match a {
            HUpdateArg::V1 => HUpdate::Version1,
            HUpdateArg::V2 => HUpdate::Version2,
            HUpdateArg::Auto => HUpdate::Auto,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Model JSON written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Ground-truth topic distributions written by `generate`.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TopicsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub top_n: usize,
}

/// Finds `--config <path>` (or `--config=<path>`) in raw arguments.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Turns a flat JSON object into `--key value` arguments. `true` becomes a
/// bare switch and `false` or `null` is dropped.
fn config_args(path: &Path) -> anyhow::Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let Value::Object(map) = value else {
        bail!("config {} must be a JSON object", path.display());
    };
    let mut out = Vec::new();
    for (key, v) in map {
        if key == "config" {
            continue;
        }
        let flag = format!("--{key}");
        match v {
            Value::Bool(true) => out.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => out.extend([flag.into(), s.into()]),
            Value::Number(n) => out.extend([flag.into(), n.to_string().into()]),
            other => bail!("config key {key:?} has unsupported value {other}"),
        }
    }
    Ok(out)
}

/// Parses arguments, splicing config-file values in front of the command
/// line ones so that explicit flags override them.
pub fn parse_args<I, T>(args: I) -> anyhow::Result<Cli>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Some(path) = config_path(&args) {
        let sub = args
            .iter()
            .position(|a| matches!(a.to_str(), Some("generate" | "fit" | "evaluate" | "topics")));
        if let Some(pos) = sub {
            let extra = config_args(&path)?;
            args.splice(pos + 1..pos + 1, extra);
        }
    }
    Ok(Cli::try_parse_from(args).unwrap_or_else(|e| e.exit()))
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Evaluate(a) => cmd_evaluate(&a).map(|_| ()),
        Command::Topics(a) => cmd_topics(&a),
    }
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn cmd_generate(a: &GenerateArgs) -> anyhow::Result<()> {
    let mut spec = match &a.spec {
        Some(p) => SyntheticSpec::read(p)?,
        None => synth::default_spec(),
    };
    if let Some(seed) = a.seed {
        spec.rng_seed = seed;
    }
    let background = match &a.background {
        Some(p) => TokenizedCorpus::read(p)?,
        None => synth::bundled_background(),
    };
    let (corpus, truth) = synth::generate(&background, &spec)?;
    create_dir(&a.out_dir)?;
    let d = &a.out_dir;
    io::write_text(d.join("corpus.txt"), &corpus.to_text())?;
    if let Some(ids) = &corpus.source_ids {
        io::write_text(d.join("source_ids.txt"), &ids.iter().map(|s| format!("{s}\n")).collect::<String>())?;
    }
    io::write_text(d.join("labels.txt"), &truth.labels_text())?;
    io::write_text(d.join("truth.json"), &truth.distributions_json()?)?;
    io::write_text(d.join("spec.json"), &spec.to_json()?)?;
    io::write_text(d.join("seeds.txt"), &spec.all_words().iter().map(|w| format!("{w}\n")).collect::<String>())?;
    info!(
        "wrote {} documents ({} injected) to {}",
        corpus.len(),
        truth.n_injected(),
        d.display()
    );
    Ok(())
}

struct Prepared {
    vocab: Vocabulary,
    v: DocTermMatrix,
    spec: ConstraintSpec,
    seeds: SeedSet,
}

fn prepare(a: &FitArgs) -> anyhow::Result<Prepared> {
    let corpus = TokenizedCorpus::read(&a.corpus)?;
    let vocab = corpus::build_vocabulary(&corpus, a.min_df, a.max_df)?;
    let v = match a.weighting {
        Weighting::Tfidf => corpus::build_tfidf(&corpus, &vocab)?,
        Weighting::Count => corpus::build_count_matrix(&corpus, &vocab)?,
    };
    let n_minority = if a.classical {
        0
    } else {
        a.minority.unwrap_or(a.topics.div_ceil(3))
    };
    let seeds = if a.classical || n_minority == 0 {
        SeedSet::empty()
    } else {
        let path = a
            .seeds
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("--seeds is required unless --classical or --minority 0"))?;
        corpus::resolve_seeds(&SeedSet::read_words(path)?, &vocab)?
    };
    let seedless = corpus::find_seedless_docs(&v, &seeds)?;
    let spec = ConstraintSpec::new(
        a.topics,
        n_minority,
        a.w_max,
        a.theta_min,
        a.eta,
        seeds.indices.clone(),
        seedless.indices,
    )?;
    Ok(Prepared { vocab, v, spec, seeds })
}

fn summarize(a: &FitArgs, p: &Prepared, cfg: &FitConfig, out: &FitOutcome, secs: f64) -> RunSummary {
    let r = &out.report;
    RunSummary {
        rng_seed: cfg.rng_seed,
        classical: a.classical,
        n_topics: p.spec.n_topics,
        n_minority: p.spec.n_minority,
        theta_min: p.spec.theta_min,
        w_max: p.spec.w_max,
        eta: p.spec.eta,
        max_iters: cfg.max_iters,
        rel_tol: cfg.rel_tol,
        h_update: format!("{:?}", a.h_update).to_lowercase(),
        weighting: format!("{:?}", a.weighting).to_lowercase(),
        n_seed_terms: p.seeds.indices.len(),
        n_seedless_docs: p.spec.seedless_docs.len(),
        initial_kl: r.initial_kl,
        final_kl: r.final_kl(),
        final_max_g1_residual: r.g1_residual_trace.last().copied().unwrap_or(0.0),
        final_max_g2_residual: r.g2_residual_trace.last().copied().unwrap_or(0.0),
        iterations_run: r.iterations_run,
        converged: r.converged,
        v2_fallback_cells: r.v2_fallback_cells,
        degenerate_row_resets: r.degenerate_row_resets,
        wall_time_secs: secs,
    }
}

fn write_model(dir: &Path, stem: &str, model: &ModelExport, format: ModelFormat) -> anyhow::Result<()> {
    if matches!(format, ModelFormat::Json | ModelFormat::Both) {
        io::write_text(dir.join(format!("{stem}.json")), &model.to_json()?)?;
    }
    if matches!(format, ModelFormat::Tsv | ModelFormat::Both) {
        io::write_text(dir.join(format!("{stem}.tsv")), &model.to_tsv())?;
    }
    Ok(())
}

/// Writes `model.json`, `trace.csv` and `summary.json` (or per-seed
/// `*_seed<S>` variants plus `kl_band.csv` when repeating).
pub fn cmd_fit(a: &FitArgs) -> anyhow::Result<()> {
    if a.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    let p = prepare(a)?;
    let base = FitConfig {
        max_iters: a.max_iters,
        rel_tol: a.rel_tol,
        h_update: a.h_update.into(),
        rng_seed: a.seed,
        ..FitConfig::default()
    };
    base.validate()?;
    info!(
        "fitting {}x{} matrix ({} non-zeros), K={}, K_MH={}, {} seed terms, {} seedless docs",
        p.v.n_docs(),
        p.v.n_terms(),
        p.v.nnz(),
        p.spec.n_topics,
        p.spec.n_minority,
        p.seeds.indices.len(),
        p.spec.seedless_docs.len()
    );

    let seeds: Vec<u64> = (0..a.repeats as u64).map(|r| a.seed.wrapping_add(r)).collect();
    let runs: Vec<(FitConfig, FitOutcome, f64)> = seeds
        .par_iter()
        .map(|&s| {
            let cfg = FitConfig { rng_seed: s, ..base.clone() };
            let start = Instant::now();
            let out = solver::fit(&p.v, &p.spec, &cfg).with_context(|| format!("fit with seed {s}"))?;
            Ok((cfg, out, start.elapsed().as_secs_f64()))
        })
        .collect::<anyhow::Result<_>>()?;

    create_dir(&a.out_dir)?;
    let d = &a.out_dir;
    let mut summaries = Vec::with_capacity(runs.len());
    for (cfg, out, secs) in &runs {
        let suffix = if a.repeats == 1 {
            String::new()
        } else {
            format!("_seed{}", cfg.rng_seed)
        };
        let model = ModelExport::new(&out.factors, &p.vocab, &p.spec, cfg.rng_seed, out.report.iterations_run);
        write_model(d, &format!("model{suffix}"), &model, a.format)?;
        io::write_text(d.join(format!("trace{suffix}.csv")), &io::trace_csv(&out.report))?;
        let s = summarize(a, &p, cfg, out, *secs);
        info!(
            "seed {}: KL {:.6} -> {:.6} in {} iterations ({:.2}s)",
            s.rng_seed, s.initial_kl, s.final_kl, s.iterations_run, s.wall_time_secs
        );
        summaries.push(s);
    }
    if a.repeats == 1 {
        io::write_json(d.join("summary.json"), &summaries[0])?;
    } else {
        let reports: Vec<_> = runs.iter().map(|(_, o, _)| &o.report).collect();
        io::write_text(d.join("kl_band.csv"), &io::kl_band_csv(&reports))?;
        io::write_json(d.join("summary.json"), &summaries)?;
    }
    Ok(())
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> anyhow::Result<eval::ScoreReport> {
    let model = ModelExport::read(&a.model)?;
    let f = model.factors().with_context(|| format!("validating {}", a.model.display()))?;
    let labels = GroundTruth::read_labels(&a.labels)?;
    if labels.len() != model.meta.m {
        return Err(Error::DimensionMismatch(format!(
            "model has {} documents but {} has {} labels",
            model.meta.m,
            a.labels.display(),
            labels.len()
        ))
        .into());
    }
    let truth = GroundTruth::read_distributions(&a.truth)?;
    let report = eval::score(&f.w, &f.h, &model.vocab(), &labels, &truth)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(out) = &a.out {
        io::write_text(out, &json)?;
    }
    print!("{json}");
    Ok(report)
}

/// One line per topic: index, a `*` for minority topics, then the terms.
pub fn topic_listing(model: &ModelExport, top_n: usize) -> anyhow::Result<String> {
    let f = model.factors()?;
    let n = model.meta.n;
    let top_n = if top_n > n {
        warn!("--top-n {top_n} exceeds the vocabulary size {n}; listing {n} terms");
        n
    } else {
        top_n
    };
    let mut out = String::new();
    for (k, terms) in eval::top_terms(&f.h, top_n).into_iter().enumerate() {
        let flag = if k < model.meta.k_mh { "*" } else { " " };
        let words: Vec<&str> = terms.iter().map(|&j| model.vocabulary[j].as_str()).collect();
        out.push_str(&format!("{k:>3}{flag} {}\n", words.join(" ")));
    }
    Ok(out)
}

pub fn cmd_topics(a: &TopicsArgs) -> anyhow::Result<()> {
    let model = ModelExport::read(&a.model)?;
    print!("{}", topic_listing(&model, a.top_n)?);
    Ok(())
}
