//! Command-line front end. Every command writes a [`RunManifest`] that
//! `replay` can re-execute.

mod commands;
mod manifest;
mod reproduce;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use manifest::RunManifest;
pub use reproduce::{
    benchmark_entries, block_distance_matrix, noise_medians, noise_setting, noise_sweep, planted_fit, planted_instance,
    planted_run, search_quality, NoiseMedian, NoiseSetting, PlantedRun, SearchQuality, SearchQuery,
};

use crate::error::Result;
use crate::regularity::SummarizationConfig;
use crate::search::IndexOptions;
use crate::summary::WeightRule;

#[derive(Debug, Parser, Serialize)]
#[command(name = "regpart", version, about = "Regular-partition graph summaries, search and decomposition")]
pub struct Cli {
    /// Where to write the run manifest (default: next to the main output).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic graph.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Summarize a graph into a reduced graph.
    Summarize(SummarizeArgs),
    /// Expand a summary back into a graph.
    Blowup(BlowupArgs),
    /// Reconstruction error between aligned edge lists.
    EvalError(EvalErrorArgs),
    /// Manage a summary database.
    #[command(subcommand)]
    Db(DbCmd),
    /// Fit a regular decomposition to a graph's distance matrix.
    Decompose(DecomposeArgs),
    /// Estimate the number of groups from the cost curve.
    EstimateK(EstimateKArgs),
    /// Compute and cache a distance matrix.
    Distances(DistancesArgs),
    /// Re-run an experiment protocol at desk scale.
    #[command(subcommand)]
    Reproduce(ReproduceCmd),
    /// Re-execute a recorded run and check its outputs are unchanged.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenerateCmd {
    /// Cliques corrupted by random edge insertions and deletions.
    NoisyClique(NoisyCliqueArgs),
    /// Erdős–Rényi graph.
    Er(ErArgs),
    /// Two-community planted partition graph.
    Planted(PlantedArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct NoisyCliqueArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub clusters: usize,
    /// Spurious edge probability.
    #[arg(long)]
    pub eta1: f64,
    /// Intra-cluster deletion probability.
    #[arg(long)]
    pub eta2: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge list output; the clean graph goes to `<out>.gt`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ErArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PlantedArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

/// Summarization parameters shared by several commands.
#[derive(Clone, Debug, Args, Serialize)]
pub struct SummaryOpts {
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Minimum compression rate `1 − k/n` of a kept partition.
    #[arg(long, default_value_t = 0.9)]
    pub c_min: f64,
    #[arg(long, default_value_t = 10)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 4)]
    pub initial_classes: usize,
    #[arg(long, default_value_t = 0.5)]
    pub sparsify_threshold: f64,
    /// Density floor for superedges (default: epsilon).
    #[arg(long)]
    pub d_prime: Option<f64>,
    /// Keep superedges only on ε-regular pairs.
    #[arg(long)]
    pub strict_regular: bool,
}

impl SummaryOpts {
    pub fn config(&self, seed: u64) -> SummarizationConfig {
        SummarizationConfig {
            epsilon: self.epsilon,
            c_min: self.c_min,
            max_iterations: self.max_iter,
            sparsify_threshold: self.sparsify_threshold,
            rng_seed: seed,
            initial_classes: self.initial_classes,
        }
    }

    pub fn rule(&self) -> WeightRule {
        if self.strict_regular {
            WeightRule::RegularAndDense
        } else {
            WeightRule::Dense
        }
    }

    pub fn index_options(&self, seed: u64, keep_raw: bool) -> IndexOptions {
        IndexOptions {
            summarization: self.config(seed),
            d_prime: self.d_prime,
            weight_rule: self.rule(),
            keep_raw_spectrum: keep_raw,
        }
    }
}

impl Default for SummaryOpts {
    fn default() -> Self {
        let cfg = SummarizationConfig::default();
        SummaryOpts {
            epsilon: cfg.epsilon,
            c_min: cfg.c_min,
            max_iter: cfg.max_iterations,
            initial_classes: cfg.initial_classes,
            sparsify_threshold: cfg.sparsify_threshold,
            d_prime: None,
            strict_regular: false,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SummarizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub opts: SummaryOpts,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Summary JSON; the vertex id map goes to `<output>.ids.csv`.
    #[arg(long)]
    pub output: PathBuf,
    /// Per-iteration trace as CSV.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BlowupArgs {
    #[arg(long)]
    pub summary: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Draw unweighted edges with probability equal to the block weight.
    #[arg(long)]
    pub sample: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Vertex id map (default: `<summary>.ids.csv` when present).
    #[arg(long)]
    pub ids: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalErrorArgs {
    #[arg(long)]
    pub original: PathBuf,
    #[arg(long)]
    pub reconstructed: PathBuf,
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Report file, CSV when the extension is `.csv`, JSON otherwise.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DbCmd {
    /// Summarize a graph and store it.
    Add(DbAddArgs),
    /// Rank stored graphs by spectral distance to a query graph.
    Query(DbQueryArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DbAddArgs {
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub opts: SummaryOpts,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also store the spectrum of the original graph.
    #[arg(long)]
    pub raw_spectrum: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct DbQueryArgs {
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Head/tail split index (default: half the shorter spectrum).
    #[arg(long)]
    pub l: Option<usize>,
    /// Compare spectra of the original graphs instead of the summaries.
    #[arg(long)]
    pub raw: bool,
    #[command(flatten)]
    pub opts: SummaryOpts,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    #[arg(long)]
    pub csv: bool,
    /// Ranking file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Graph input and reference selection shared by the distance commands.
#[derive(Clone, Debug, Args, Serialize)]
pub struct DistanceInput {
    #[arg(long)]
    pub input: PathBuf,
    /// Read arcs, keep the largest strongly connected component, then symmetrize.
    #[arg(long)]
    pub directed: bool,
    /// Reference vertices: `all`, `uniform:M` or `paths:P`.
    #[arg(long, default_value = "all")]
    pub refs: String,
    /// Target vertices: `all` or `uniform:N`.
    #[arg(long, default_value = "all")]
    pub targets: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct FitOpts {
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 50)]
    pub iters: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RestPolicy {
    /// Only fitted targets are labeled.
    #[default]
    None,
    /// Classify remaining vertices from their reference distances.
    Classify,
    /// Give neighbors of fitted targets the target's group.
    Expand,
}

#[derive(Debug, Args, Serialize)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: DistanceInput,
    #[arg(long, required_unless_present = "estimate_k")]
    pub k: Option<usize>,
    /// Choose k at the knee of the cost curve.
    #[arg(long, conflicts_with = "k")]
    pub estimate_k: bool,
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    #[arg(long, default_value_t = 0.01)]
    pub knee_ratio: f64,
    #[command(flatten)]
    pub fit: FitOpts,
    #[arg(long, value_enum, default_value_t = RestPolicy::None)]
    pub rest: RestPolicy,
    #[arg(long)]
    pub labels_out: PathBuf,
    #[arg(long)]
    pub curve_out: Option<PathBuf>,
    /// Also write the distance matrix cache.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateKArgs {
    #[command(flatten)]
    pub input: DistanceInput,
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    #[arg(long, default_value_t = 0.01)]
    pub knee_ratio: f64,
    #[command(flatten)]
    pub fit: FitOpts,
    #[arg(long)]
    pub curve_out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DistancesArgs {
    #[command(flatten)]
    pub input: DistanceInput,
    /// Binary cache output.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReproduceCmd {
    /// Reconstruction error against ground truth over a noise grid.
    NoiseSweep(NoiseSweepArgs),
    /// MAP@k of summary-based and raw spectral search.
    SearchQuality(SearchQualityArgs),
    /// Planted partition recovery with full and sampled references.
    Planted(PlantedReproArgs),
    /// Cost curve and knee on a noiseless block distance matrix.
    Knee(KneeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct NoiseSweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "2000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub clusters: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5")]
    pub etas: Vec<f64>,
    #[command(flatten)]
    pub opts: SummaryOpts,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SearchQualityArgs {
    #[arg(long, default_value_t = 1500)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_value = "4,8,12,16,20")]
    pub clusters: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.15,0.2,0.25,0.3")]
    pub noise: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    pub query_seeds: u64,
    #[arg(long, default_value_t = 36)]
    pub k: usize,
    #[command(flatten)]
    pub opts: SummaryOpts,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PlantedReproArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 20.0)]
    pub a: f64,
    #[arg(long, default_value_t = 2.0)]
    pub b: f64,
    #[arg(long, value_delimiter = ',', default_value = "all,uniform:400")]
    pub refs: Vec<String>,
    #[command(flatten)]
    pub fit: FitOpts,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct KneeArgs {
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    /// Block sizes of the noiseless matrix.
    #[arg(long, value_delimiter = ',', default_value = "30,30")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub intra: u32,
    #[arg(long, default_value_t = 5)]
    pub inter: u32,
    #[arg(long, default_value_t = 0.01)]
    pub knee_ratio: f64,
    #[command(flatten)]
    pub fit: FitOpts,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// Collects outputs and timings while a command runs.
pub(crate) struct RunContext {
    pub outputs: Vec<PathBuf>,
    pub timings: BTreeMap<String, f64>,
    pub seed: Option<u64>,
}

impl RunContext {
    fn new() -> Self {
        RunContext { outputs: Vec::new(), timings: BTreeMap::new(), seed: None }
    }

    pub fn write(&mut self, path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, contents)?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        self.write(path, serde_json::to_string_pretty(value)? + "\n")
    }

    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.timings.insert(name.to_string(), start.elapsed().as_secs_f64());
        Ok(out)
    }
}

/// Serializes rows as CSV with a header line.
pub(crate) fn csv_string<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

impl Command {
    fn name(&self) -> String {
        let sub = match self {
            Command::Generate(GenerateCmd::NoisyClique(_)) => "generate noisy-clique",
            Command::Generate(GenerateCmd::Er(_)) => "generate er",
            Command::Generate(GenerateCmd::Planted(_)) => "generate planted",
            Command::Summarize(_) => "summarize",
            Command::Blowup(_) => "blowup",
            Command::EvalError(_) => "eval-error",
            Command::Db(DbCmd::Add(_)) => "db add",
            Command::Db(DbCmd::Query(_)) => "db query",
            Command::Decompose(_) => "decompose",
            Command::EstimateK(_) => "estimate-k",
            Command::Distances(_) => "distances",
            Command::Reproduce(ReproduceCmd::NoiseSweep(_)) => "reproduce noise-sweep",
            Command::Reproduce(ReproduceCmd::SearchQuality(_)) => "reproduce search-quality",
            Command::Reproduce(ReproduceCmd::Planted(_)) => "reproduce planted",
            Command::Reproduce(ReproduceCmd::Knee(_)) => "reproduce knee",
            Command::Replay(_) => "replay",
        };
        sub.to_string()
    }

    /// Path the manifest is derived from when `--manifest` is not given.
    fn primary_output(&self) -> Option<PathBuf> {
        match self {
            Command::Generate(GenerateCmd::NoisyClique(a)) => Some(a.out.clone()),
            Command::Generate(GenerateCmd::Er(a)) => Some(a.out.clone()),
            Command::Generate(GenerateCmd::Planted(a)) => Some(a.out.clone()),
            Command::Summarize(a) => Some(a.output.clone()),
            Command::Blowup(a) => Some(a.out.clone()),
            Command::EvalError(a) => Some(a.out.clone()),
            Command::Db(DbCmd::Add(a)) => Some(a.db.join(format!("add-{}", a.id))),
            Command::Db(DbCmd::Query(a)) => a.out.clone(),
            Command::Decompose(a) => Some(a.labels_out.clone()),
            Command::EstimateK(a) => Some(a.curve_out.clone()),
            Command::Distances(a) => Some(a.out.clone()),
            Command::Reproduce(ReproduceCmd::NoiseSweep(a)) => Some(a.out_dir.join("noise-sweep")),
            Command::Reproduce(ReproduceCmd::SearchQuality(a)) => Some(a.out_dir.join("search-quality")),
            Command::Reproduce(ReproduceCmd::Planted(a)) => Some(a.out_dir.join("planted")),
            Command::Reproduce(ReproduceCmd::Knee(a)) => Some(a.out_dir.join("knee")),
            Command::Replay(_) => None,
        }
    }
}

fn manifest_path(cli: &Cli) -> PathBuf {
    if let Some(p) = &cli.manifest {
        return p.clone();
    }
    match cli.command.primary_output() {
        Some(out) => {
            let mut name = out.into_os_string();
            name.push(".manifest.json");
            PathBuf::from(name)
        }
        None => PathBuf::from(format!("regpart-{}.manifest.json", cli.command.name().replace(' ', "-"))),
    }
}

/// Parses `argv` (without the program name) and runs the command.
pub fn run(argv: &[String]) -> Result<()> {
    let cli = Cli::try_parse_from(std::iter::once("regpart".to_string()).chain(argv.iter().cloned()))
        .map_err(|e| crate::error::Error::InvalidArgument(e.to_string()))?;
    execute(cli, argv)
}

/// Runs an already parsed command line.
pub fn execute(cli: Cli, argv: &[String]) -> Result<()> {
    if let Command::Replay(args) = &cli.command {
        return commands::replay(&args.manifest);
    }
    let mut ctx = RunContext::new();
    commands::dispatch(&cli.command, &mut ctx)?;
    let manifest = RunManifest {
        command: cli.command.name(),
        argv: argv.to_vec(),
        config: serde_json::to_value(&cli.command)?,
        seed: ctx.seed,
        timings: ctx.timings.clone(),
        outputs: ctx.outputs.clone(),
    };
    manifest.write(&manifest_path(&cli))
}
