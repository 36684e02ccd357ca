//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, bad parameter
//! values, unknown config keys), 2 for data errors (unreadable or invalid
//! input files, failed runs).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::parser::ValueSource;
use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use tdck_core::graph::{build_graph, DotOptions};
use tdck_core::metrics;
use tdck_core::preprocess::{preprocess, PreprocessPolicy};
use tdck_core::synth::{generate, score, StagedScenario};
use tdck_core::tuning::{beta_from_percentage, Intersection};
use tdck_core::{
    AlgorithmConfig, CentroidSolver, Centroid, Dataset, Error as CoreError, Partition, PenaltyKind,
    TuningWeights, Variant,
};

use crate::dataio::{self, fmt_real, Schema};
use crate::kv::KvFile;
use crate::sweep::{self, parse_curves, SweepParam, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "tdck", version, about = "Temporal-driven constrained clustering of panel data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run repeated seeded clusterings and write the best partition.
    Cluster(ClusterArgs),
    /// Sweep one parameter and apply the curve crossing heuristic.
    Sweep(SweepArgs),
    /// Induce the evolution graph of an assignment.
    Graph(GraphArgs),
    /// Generate a synthetic panel with planted phases.
    Synth(SynthArgs),
    /// Recompute MDvar, Tvar and ShaP for an assignment.
    Metrics(MetricsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PreprocessMode {
    /// Use values as read.
    None,
    /// Remove entity means, then z-scale every attribute.
    Panel,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Plain-text `key = value` file mirroring these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV: `entity,time,<attributes...>`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "none")]
    preprocess: PreprocessMode,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Debug, Args)]
struct AlgoArgs {
    /// simple, temporal, constrained, tdck or tck.
    #[arg(long, default_value = "tdck")]
    algorithm: Variant,
    #[arg(long, default_value_t = 8)]
    clusters: usize,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Gaussian penalty scale in dissimilarity units.
    #[arg(long, conflicts_with = "beta_pct")]
    beta: Option<f64>,
    /// Gaussian penalty scale as a percentage of the mean pairwise dissimilarity.
    #[arg(long)]
    beta_pct: Option<f64>,
    /// Gaussian penalty width in time units.
    #[arg(long)]
    delta: Option<f64>,
    /// Threshold penalty weight.
    #[arg(long)]
    alpha_star: Option<f64>,
    /// Threshold penalty window in time units.
    #[arg(long)]
    d_star: Option<f64>,
    #[arg(long, env = "TDCK_SEED")]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = AlgorithmConfig::DEFAULT_MAX_OUTER)]
    max_iterations: usize,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[command(flatten)]
    io: InputArgs,
    #[command(flatten)]
    algo: AlgoArgs,
    /// Ground-truth assignments; prints the adjusted Rand index of the best run.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    io: InputArgs,
    #[command(flatten)]
    algo: AlgoArgs,
    /// beta, delta, alpha, clusters, alpha-star or d-star.
    #[arg(long)]
    param: SweepParam,
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    #[arg(long)]
    step: f64,
    /// Curve pair for the crossing heuristic, e.g. `mdvar,shap`.
    #[arg(long)]
    curves: Option<String>,
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Assignments CSV (`entity,timestamp,cluster`).
    #[arg(long)]
    assignments: Option<PathBuf>,
    /// Centroids CSV; when absent, centroids are refitted from the assignments.
    #[arg(long)]
    centroids: Option<PathBuf>,
    /// Centroid weighting used when refitting.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    alpha: f64,
    /// Edge threshold; 0 keeps every transition that occurs.
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    drop_self_loops: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario `key = value` file; unspecified keys keep their defaults.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Overrides the scenario's seed.
    #[arg(long, env = "TDCK_SEED")]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[command(flatten)]
    io: InputArgs,
    #[arg(long)]
    assignments: Option<PathBuf>,
    #[arg(long)]
    centroids: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    alpha: f64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<dataio::DataError> for CliError {
    fn from(e: dataio::DataError) -> Self {
        CliError::Data(e.into())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parameter-domain errors are the caller's fault; everything else from the
/// core library is a data problem.
fn classify(e: CoreError) -> CliError {
    match e {
        CoreError::InvalidParameter { .. } | CoreError::UnknownAlgorithm(_) => usage(e.to_string()),
        other => CliError::Data(other.into()),
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match parse(argv) {
        Ok(cli) => cli,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return 1;
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    let outcome = match cli.command {
        Command::Cluster(a) => cmd_cluster(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Graph(a) => cmd_graph(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Metrics(a) => cmd_metrics(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

/// Parses `argv`, folding in `--config` entries for every flag that was not
/// given on the command line.
fn parse(mut argv: Vec<OsString>) -> Result<Cli, CliError> {
    let matches = match Cli::command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    if let Some(path) = sub.get_one::<PathBuf>("config") {
        let file = KvFile::read(path).map_err(|e| usage(format!("config: {e}")))?;
        let cmd = Cli::command();
        let spec = cmd.find_subcommand(name).expect("known subcommand");
        for (key, value) in file.iter() {
            let known = spec
                .get_arguments()
                .any(|a| a.get_id().as_str() == key && key != "config");
            if !known {
                return Err(usage(format!("config: `{key}` is not a `{name}` option")));
            }
            if sub.value_source(key) != Some(ValueSource::CommandLine) {
                argv.push(format!("--{}={value}", key.replace('_', "-")).into());
            }
        }
    }
    let matches = match Cli::command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => return Err(usage(e.to_string().trim_end().to_string())),
    };
    Cli::from_arg_matches(&matches).map_err(|e| usage(e.to_string()))
}

fn require<'a>(v: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    v.as_deref()
        .ok_or_else(|| usage(format!("missing required option --{flag}")))
}

fn load_dataset(io: &InputArgs) -> Result<Dataset, CliError> {
    let path = require(&io.input, "input")?;
    let raw = dataio::load_csv(path, &Schema::default())?;
    let ds = match io.preprocess {
        PreprocessMode::None => {
            let ds = raw
                .to_dataset()
                .with_context(|| format!("building dataset from {}", path.display()))?;
            let dropped = raw.rows.len() - ds.len();
            if dropped > 0 {
                eprintln!("warning: dropped {dropped} rows with missing values");
            }
            ds
        }
        PreprocessMode::Panel => {
            let (ds, report) = preprocess(&raw, PreprocessPolicy::default())
                .with_context(|| format!("preprocessing {}", path.display()))?;
            if report.dropped_rows > 0 {
                eprintln!("warning: dropped {} rows with missing values", report.dropped_rows);
            }
            if !report.dropped_attributes.is_empty() {
                eprintln!(
                    "warning: dropped constant attributes: {}",
                    report.dropped_attributes.join(", ")
                );
            }
            ds
        }
    };
    Ok(ds)
}

fn output_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(CliError::Data)
}

/// Builds the run configuration. `beta_pct` needs the dataset, so it is
/// resolved separately by [`resolve_beta_pct`].
fn algorithm_config(a: &AlgoArgs) -> Result<AlgorithmConfig, CliError> {
    let mut cfg = AlgorithmConfig::new(a.algorithm, a.clusters)
        .with_seed(a.seed.unwrap_or(0))
        .with_max_outer_iterations(a.max_iterations)
        .with_centroid_solver(CentroidSolver::default());
    if let Some(alpha) = a.alpha {
        cfg = cfg.with_alpha(alpha);
    }
    let kind = cfg.penalty.kind;
    let gaussian = [("beta", a.beta), ("beta-pct", a.beta_pct), ("delta", a.delta)];
    let threshold = [("alpha-star", a.alpha_star), ("d-star", a.d_star)];
    let misplaced = match kind {
        PenaltyKind::Gaussian => threshold.iter().find(|(_, v)| v.is_some()),
        PenaltyKind::Threshold => gaussian.iter().find(|(_, v)| v.is_some()),
        PenaltyKind::None => gaussian.iter().chain(&threshold).find(|(_, v)| v.is_some()),
    };
    if let Some((flag, _)) = misplaced {
        return Err(usage(format!(
            "--{flag} does not apply to algorithm `{}`",
            a.algorithm
        )));
    }
    match kind {
        PenaltyKind::Gaussian => {
            if let Some(b) = a.beta {
                cfg = cfg.with_beta(b);
            }
            if let Some(d) = a.delta {
                cfg = cfg.with_delta(d);
            }
        }
        PenaltyKind::Threshold => {
            if let Some(s) = a.alpha_star {
                cfg = cfg.with_beta(s);
            }
            if let Some(d) = a.d_star {
                cfg = cfg.with_delta(d);
            }
        }
        PenaltyKind::None => {}
    }
    if a.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    if let Some(p) = a.beta_pct {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(usage(format!("--beta-pct {p} must be non-negative")));
        }
    }
    cfg.validate().map_err(classify)?;
    Ok(cfg)
}

fn resolve_beta_pct(
    cfg: AlgorithmConfig,
    a: &AlgoArgs,
    ds: &Dataset,
) -> Result<AlgorithmConfig, CliError> {
    match a.beta_pct {
        Some(p) => {
            let beta = beta_from_percentage(p, ds, cfg.weights().map_err(classify)?)
                .map_err(classify)?;
            eprintln!("beta = {} ({p}% of mean pairwise dissimilarity)", fmt_real(beta));
            Ok(cfg.with_beta(beta))
        }
        None => Ok(cfg),
    }
}

fn placeholder_partition(labels: Vec<usize>, clusters: usize, dim: usize) -> Result<Partition, CliError> {
    Partition::new(labels, vec![Centroid::new(0.0, vec![0.0; dim]); clusters.max(1)])
        .map_err(|e| CliError::Data(e.into()))
}

fn cmd_cluster(a: ClusterArgs) -> Result<(), CliError> {
    let cfg = algorithm_config(&a.algo)?;
    let ds = load_dataset(&a.io)?;
    let cfg = resolve_beta_pct(cfg, &a.algo, &ds)?;
    let result = sweep::repeated(&ds, &cfg, a.algo.runs).map_err(classify)?;

    output_dir(&a.io.output_dir)?;
    let dir = &a.io.output_dir;
    dataio::write_assignments(&ds, &result.best.partition, &dir.join("assignments.csv"))?;
    dataio::write_centroids(&result.best.partition, &dir.join("centroids.csv"))?;
    dataio::write_metrics(&result.records, &dir.join("metrics.csv"))?;

    let m = result.mean;
    println!(
        "J={} MDvar={} Tvar={} ShaP={}",
        fmt_real(m.objective),
        fmt_real(m.mdvar),
        fmt_real(m.tvar),
        fmt_real(m.shap)
    );
    if let Some(truth_path) = &a.truth {
        let (labels, k) = dataio::read_assignments(&ds, truth_path)?;
        let truth = placeholder_partition(labels, k, ds.dimension())?;
        let s = score(&truth, &result.best.partition).map_err(|e| CliError::Data(e.into()))?;
        println!("ARI={}", fmt_real(s.ari));
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<(), CliError> {
    let base = algorithm_config(&a.algo)?;
    let curves = match &a.curves {
        Some(s) => parse_curves(s).map_err(usage)?,
        None => a.param.default_curves(),
    };
    if !(a.step > 0.0) || !(a.from <= a.to) {
        return Err(usage("sweep range needs --from <= --to and --step > 0"));
    }
    if a.param == SweepParam::Beta && a.algo.beta_pct.is_some() {
        return Err(usage("--beta-pct cannot be combined with a beta sweep"));
    }
    // Check every grid value before doing any work.
    for v in tdck_core::tuning::grid(a.from, a.to, a.step).map_err(classify)? {
        a.param.apply(&base, v).map_err(classify)?;
    }
    let ds = load_dataset(&a.io)?;
    let base = resolve_beta_pct(base, &a.algo, &ds)?;
    let spec = SweepSpec {
        param: a.param,
        lo: a.from,
        hi: a.to,
        step: a.step,
        runs: a.algo.runs,
        curves,
        base,
    };
    let outcome = sweep::run_sweep(&ds, &spec).map_err(classify)?;

    output_dir(&a.io.output_dir)?;
    sweep::write_sweep(&outcome, &a.io.output_dir.join("sweep.csv"))?;
    sweep::write_sweep_runs(&outcome, &a.io.output_dir.join("sweep_runs.csv"))?;

    let pair = format!("{}/{}", curves.0.name(), curves.1.name());
    match &outcome.intersection {
        Intersection::Found(xs) => {
            if xs.len() > 1 {
                eprintln!(
                    "warning: {pair} curves cross {} times; reporting the first",
                    xs.len()
                );
            }
            println!("suggested {} = {}", a.param, fmt_real(xs[0]));
        }
        Intersection::Degenerate => {
            eprintln!("warning: a {pair} curve is constant over the sweep");
            println!("no intersection");
        }
        Intersection::Disjoint => {
            eprintln!("warning: the rescaled {pair} curves never cross");
            println!("no intersection");
        }
    }
    Ok(())
}

/// Loads assignments and centroids (or refits them with `alpha`).
fn load_partition(
    ds: &Dataset,
    assignments: &Option<PathBuf>,
    centroids: &Option<PathBuf>,
    alpha: f64,
) -> Result<Partition, CliError> {
    let weights = TuningWeights::from_alpha(alpha).map_err(classify)?;
    let path = require(assignments, "assignments")?;
    let (labels, k) = dataio::read_assignments(ds, path)?;
    match centroids {
        Some(cpath) => {
            let cents = dataio::read_centroids(cpath)?;
            if cents.len() < k {
                return Err(CliError::Data(anyhow::anyhow!(
                    "{} lists {} centroids but assignments use {k} clusters",
                    cpath.display(),
                    cents.len()
                )));
            }
            if cents.iter().any(|c| c.description.len() != ds.dimension()) {
                return Err(CliError::Data(anyhow::anyhow!(
                    "{}: centroid dimension does not match the dataset",
                    cpath.display()
                )));
            }
            Partition::new(labels, cents).map_err(|e| CliError::Data(e.into()))
        }
        None => Partition::fit(ds, labels, k, weights, CentroidSolver::default())
            .map_err(|e| CliError::Data(e.into())),
    }
}

fn cmd_graph(a: GraphArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&a.gamma) {
        return Err(usage(format!("--gamma {} must lie in [0, 1]", a.gamma)));
    }
    TuningWeights::from_alpha(a.alpha).map_err(classify)?;
    let ds = load_dataset(&a.io)?;
    let partition = load_partition(&ds, &a.assignments, &a.centroids, a.alpha)?;
    let graph = build_graph(&ds, &partition, a.gamma).map_err(classify)?;

    output_dir(&a.io.output_dir)?;
    dataio::write_adjacency(&graph, &a.io.output_dir.join("adjacency.csv"))?;
    let options = DotOptions {
        drop_self_loops: a.drop_self_loops,
        edge_labels: true,
    };
    dataio::write_dot(&graph, options, &a.io.output_dir.join("graph.dot"))?;
    let shown = graph
        .edges()
        .iter()
        .filter(|(p, q)| !(a.drop_self_loops && p == q))
        .count();
    println!("clusters={} edges={shown} gamma={}", graph.clusters, a.gamma);
    Ok(())
}

const SCENARIO_KEYS: [&str; 11] = [
    "entities",
    "timestamps",
    "start",
    "eras",
    "tracks",
    "dimension",
    "separation",
    "drift",
    "stddev",
    "switch_jitter",
    "seed",
];

/// Reads a staged scenario; missing keys keep [`StagedScenario::default`].
pub fn read_scenario(path: &Path) -> anyhow::Result<StagedScenario> {
    let kv = KvFile::read(path)?;
    kv.check_keys(&SCENARIO_KEYS)?;
    let mut s = StagedScenario::default();
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = kv.parsed(stringify!($field))? { s.$field = v; })*
        };
    }
    set!(entities, timestamps, start, eras, tracks, dimension, separation, drift, stddev, switch_jitter, seed);
    Ok(s)
}

fn cmd_synth(a: SynthArgs) -> Result<(), CliError> {
    let mut scenario = match &a.scenario {
        Some(p) => read_scenario(p).with_context(|| format!("reading {}", p.display()))?,
        None => StagedScenario::default(),
    };
    if let Some(seed) = a.seed {
        scenario.seed = seed;
    }
    let spec = scenario.build().map_err(|e| CliError::Data(e.into()))?;
    let (ds, truth) = generate(&spec).map_err(|e| CliError::Data(e.into()))?;

    output_dir(&a.output_dir)?;
    dataio::write_dataset(&ds, &[], &a.output_dir.join("data.csv"))?;
    dataio::write_assignments(&ds, &truth, &a.output_dir.join("truth.csv"))?;
    println!(
        "observations={} entities={} phases={}",
        ds.len(),
        ds.entity_count(),
        spec.phases.len()
    );
    Ok(())
}

fn cmd_metrics(a: MetricsArgs) -> Result<(), CliError> {
    TuningWeights::from_alpha(a.alpha).map_err(classify)?;
    let ds = load_dataset(&a.io)?;
    let partition = load_partition(&ds, &a.assignments, &a.centroids, a.alpha)?;
    let report = metrics::report(&ds, &partition).map_err(|e| CliError::Data(e.into()))?;

    output_dir(&a.io.output_dir)?;
    let mut text = String::from("entity,n_obs,n_ch,n_min,entropy,penalty_factor\n");
    for (id, s) in &report.entities {
        text.push_str(&format!(
            "{id},{},{},{},{},{}\n",
            s.n_obs,
            s.n_ch,
            s.n_min,
            fmt_real(s.entropy),
            fmt_real(s.penalty_factor)
        ));
    }
    dataio::write_text(&text, &a.io.output_dir.join("segmentation.csv"))?;
    println!(
        "MDvar={} Tvar={} ShaP={}",
        fmt_real(report.mdvar),
        fmt_real(report.tvar),
        fmt_real(report.shap)
    );
    Ok(())
}
