use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::reproduce::{self, block_distance_matrix};
use super::{
    csv_string, BlowupArgs, Command, DbAddArgs, DbCmd, DbQueryArgs, DecomposeArgs, DistanceInput, DistancesArgs,
    EstimateKArgs, EvalErrorArgs, FitOpts, GenerateCmd, RestPolicy, ReproduceCmd, RunContext, RunManifest,
    SummarizeArgs,
};
use crate::error::{Error, Result};
use crate::generators::{erdos_renyi, planted_partition, synth_graph_gen, NoisyCliqueSpec, PlantedPartitionSpec};
use crate::graph::Graph;
use crate::io::{
    format_edge_list, format_id_map, ids_path, read_directed_edge_list, read_edge_list, LabeledGraph,
};
use crate::regdecomp::{
    classify_distances, distance_matrix, estimate_k, expand_from_targets, regular_decomposition, sample_references,
    DistanceMatrix, FitConfig, ReferenceScheme,
};
use crate::regularity::summarize;
use crate::search::{Database, SearchMode};
use crate::summary::{blow_up, blow_up_sampled, build_reduced_graph, reconstruction_error, ReducedGraph};

pub(super) fn dispatch(cmd: &Command, ctx: &mut RunContext) -> Result<()> {
    match cmd {
        Command::Generate(g) => generate(g, ctx),
        Command::Summarize(a) => summarize_cmd(a, ctx),
        Command::Blowup(a) => blowup(a, ctx),
        Command::EvalError(a) => eval_error(a, ctx),
        Command::Db(DbCmd::Add(a)) => db_add(a, ctx),
        Command::Db(DbCmd::Query(a)) => db_query(a, ctx),
        Command::Decompose(a) => decompose(a, ctx),
        Command::EstimateK(a) => estimate_k_cmd(a, ctx),
        Command::Distances(a) => distances(a, ctx),
        Command::Reproduce(r) => reproduce_cmd(r, ctx),
        Command::Replay(a) => replay(&a.manifest),
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

#[derive(Serialize)]
struct VertexLabel<'a> {
    id: &'a str,
    group: Option<usize>,
}

fn label_csv(ids: &[String], labels: &[Option<usize>]) -> Result<String> {
    let rows: Vec<VertexLabel> = ids.iter().zip(labels).map(|(id, &group)| VertexLabel { id, group }).collect();
    csv_string(&rows)
}

fn generate(cmd: &GenerateCmd, ctx: &mut RunContext) -> Result<()> {
    match cmd {
        GenerateCmd::NoisyClique(a) => {
            let spec = NoisyCliqueSpec { n: a.n, num_c: a.clusters, eta1: a.eta1, eta2: a.eta2, seed: a.seed };
            ctx.seed = Some(a.seed);
            let inst = ctx.time("generate", || synth_graph_gen(&spec))?;
            ctx.write(&a.out, format_edge_list(&LabeledGraph::with_index_ids(inst.graph)))?;
            let truth = LabeledGraph::with_index_ids(inst.ground_truth);
            ctx.write(&with_suffix(&a.out, ".gt"), format_edge_list(&truth))?;
            if let Some(path) = &a.labels_out {
                ctx.write(path, label_csv(&truth.ids, &inst.clusters)?)?;
            }
        }
        GenerateCmd::Er(a) => {
            ctx.seed = Some(a.seed);
            let g = ctx.time("generate", || erdos_renyi(a.n, a.p, a.seed))?;
            ctx.write(&a.out, format_edge_list(&LabeledGraph::with_index_ids(g)))?;
        }
        GenerateCmd::Planted(a) => {
            ctx.seed = Some(a.seed);
            let spec = PlantedPartitionSpec { n: a.n, a: a.a, b: a.b, seed: a.seed };
            let (g, truth) = ctx.time("generate", || planted_partition(&spec))?;
            let labeled = LabeledGraph::with_index_ids(g);
            ctx.write(&a.out, format_edge_list(&labeled))?;
            if let Some(path) = &a.labels_out {
                let labels: Vec<Option<usize>> = truth.into_iter().map(Some).collect();
                ctx.write(path, label_csv(&labeled.ids, &labels)?)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    k: usize,
    ind: f64,
    irregular_pairs: usize,
    compression_rate: f64,
}

fn summarize_cmd(a: &SummarizeArgs, ctx: &mut RunContext) -> Result<()> {
    ctx.seed = Some(a.seed);
    let input = read_edge_list(&a.input)?;
    let cfg = a.opts.config(a.seed);
    let summarized = ctx.time("summarize", || summarize(&input.graph, &cfg))?;
    let d_prime = a.opts.d_prime.unwrap_or(cfg.epsilon);
    let reduced = build_reduced_graph(&input.graph, &summarized.best, &summarized.verdicts, d_prime, a.opts.rule())?;
    ctx.write_json(&a.output, &reduced)?;
    ctx.write(&ids_path(&a.output), format_id_map(&input.ids))?;
    if let Some(path) = &a.trace_out {
        let rows: Vec<TraceRow> = summarized
            .trace
            .iter()
            .map(|r| TraceRow {
                iteration: r.iteration,
                k: r.k,
                ind: r.ind,
                irregular_pairs: r.irregular_pairs,
                compression_rate: r.compression_rate,
            })
            .collect();
        ctx.write(path, csv_string(&rows)?)?;
    }
    eprintln!(
        "k = {} after {} iterations ({:?}), best iteration {}",
        reduced.k(),
        summarized.trace.len(),
        summarized.stop,
        summarized.best_iteration
    );
    Ok(())
}

/// Reads an `index,id` map.
fn read_id_map(path: &Path) -> Result<Vec<String>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut ids = Vec::new();
    for (row, record) in reader.deserialize::<(usize, String)>().enumerate() {
        let (index, id) = record?;
        if index != row {
            return Err(Error::Parse { line: row + 2, message: format!("expected index {row}, found {index}") });
        }
        ids.push(id);
    }
    Ok(ids)
}

fn blowup(a: &BlowupArgs, ctx: &mut RunContext) -> Result<()> {
    ctx.seed = Some(a.seed);
    let reduced: ReducedGraph = serde_json::from_str(&fs::read_to_string(&a.summary)?)?;
    reduced.validate()?;
    let g = ctx.time("blowup", || Ok(if a.sample { blow_up_sampled(&reduced, a.seed) } else { blow_up(&reduced) }))?;
    let default_ids = ids_path(&a.summary);
    let id_file = a.ids.clone().or_else(|| default_ids.exists().then_some(default_ids));
    let ids: Vec<String> = match (reduced.retained_vertices(), id_file) {
        (Some(kept), Some(file)) => {
            let names = read_id_map(&file)?;
            kept.iter()
                .map(|&v| names.get(v).cloned().ok_or_else(|| Error::InvalidArgument(format!("id map lacks vertex {v}"))))
                .collect::<Result<_>>()?
        }
        (Some(kept), None) => kept.iter().map(|v| v.to_string()).collect(),
        (None, _) => reduced
            .class_sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &s)| (0..s).map(move |j| format!("c{c}-{j}")))
            .collect(),
    };
    ctx.write(&a.out, format_edge_list(&LabeledGraph { graph: g, ids }))
}

/// `g` reordered to follow `ids`; every id must occur in `g`.
fn align(g: &LabeledGraph, ids: &[String], what: &str) -> Result<Graph> {
    let index: HashMap<&str, usize> = g.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let order = ids
        .iter()
        .map(|id| index.get(id.as_str()).copied().ok_or_else(|| Error::InvalidArgument(format!("vertex `{id}` missing from {what}"))))
        .collect::<Result<Vec<usize>>>()?;
    g.graph.induced_subgraph(&order)
}

#[derive(Serialize)]
struct ErrorReport {
    n: usize,
    /// Original vertices absent from the reconstruction.
    dropped: usize,
    p: f64,
    error_original: f64,
    error_original_norm: f64,
    error_ground_truth: Option<f64>,
    error_ground_truth_norm: Option<f64>,
}

fn eval_error(a: &EvalErrorArgs, ctx: &mut RunContext) -> Result<()> {
    let original = read_edge_list(&a.original)?;
    let rebuilt = read_edge_list(&a.reconstructed)?;
    let n = rebuilt.graph.n();
    let aligned = align(&original, &rebuilt.ids, "the original graph")?;
    let area = (n * n).max(1) as f64;
    let error_original = reconstruction_error(&aligned, &rebuilt.graph, a.p)?;
    let error_ground_truth = match &a.ground_truth {
        Some(path) => {
            let truth = align(&read_edge_list(path)?, &rebuilt.ids, "the ground truth")?;
            Some(reconstruction_error(&rebuilt.graph, &truth, a.p)?)
        }
        None => None,
    };
    let report = ErrorReport {
        n,
        dropped: original.graph.n() - n,
        p: a.p,
        error_original,
        error_original_norm: error_original / area,
        error_ground_truth,
        error_ground_truth_norm: error_ground_truth.map(|e| e / area),
    };
    if a.out.extension().is_some_and(|e| e == "csv") {
        ctx.write(&a.out, csv_string(&[report])?)
    } else {
        ctx.write_json(&a.out, &report)
    }
}

fn db_add(a: &DbAddArgs, ctx: &mut RunContext) -> Result<()> {
    ctx.seed = Some(a.seed);
    let input = read_edge_list(&a.input)?;
    let opts = a.opts.index_options(a.seed, a.raw_spectrum);
    let mut db = Database::open(&a.db)?;
    let meta = serde_json::json!({ "input": a.input, "n": input.graph.n() });
    ctx.time("index", || db.add(&a.id, &input.graph, &opts, Some(meta)).map(|_| ()))?;
    ctx.outputs.push(db.entry_path(&a.id));
    ctx.outputs.push(db.manifest_path());
    Ok(())
}

#[derive(Serialize)]
struct RankRow<'a> {
    rank: usize,
    id: &'a str,
    distance: f64,
}

fn db_query(a: &DbQueryArgs, ctx: &mut RunContext) -> Result<()> {
    ctx.seed = Some(a.seed);
    let input = read_edge_list(&a.input)?;
    let db = Database::open(&a.db)?;
    let opts = a.opts.index_options(a.seed, false);
    let mode = if a.raw { SearchMode::Raw } else { SearchMode::Summary };
    let result = db.query(&input.graph, a.k, &opts, a.l, mode)?;
    let t = result.timing;
    ctx.timings.insert("t_s".into(), t.t_s);
    ctx.timings.insert("t_eig".into(), t.t_eig);
    ctx.timings.insert("t_sd".into(), t.t_sd);
    eprintln!("t_s,t_eig,t_sd\n{},{},{}", t.t_s, t.t_eig, t.t_sd);
    let rows: Vec<RankRow> =
        result.ranking.iter().enumerate().map(|(i, (id, d))| RankRow { rank: i + 1, id, distance: *d }).collect();
    let text = if a.csv { csv_string(&rows)? } else { serde_json::to_string_pretty(&rows)? + "\n" };
    match &a.out {
        Some(path) => ctx.write(path, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Graph analyzed by the distance commands: the largest strongly connected
/// component for directed input, the largest component otherwise.
fn load_distance_graph(input: &DistanceInput) -> Result<LabeledGraph> {
    if input.directed {
        return read_directed_edge_list(&input.input);
    }
    let full = read_edge_list(&input.input)?;
    let keep = full.graph.largest_component();
    Ok(LabeledGraph {
        graph: full.graph.induced_subgraph(&keep)?,
        ids: keep.iter().map(|&v| full.ids[v].clone()).collect(),
    })
}

fn choose_targets(g: &Graph, spec: &str, seed: u64) -> Result<Vec<usize>> {
    match spec.parse::<ReferenceScheme>()? {
        ReferenceScheme::PathCover(_) => Err(Error::InvalidArgument("targets must be `all` or `uniform:N`".into())),
        scheme => sample_references(g, scheme, seed ^ 0x7461_7267_6574_7321),
    }
}

/// References and targets for a distance command.
fn select_vertices(g: &Graph, input: &DistanceInput) -> Result<(Vec<usize>, Vec<usize>)> {
    let refs = sample_references(g, input.refs.parse()?, input.seed)?;
    let targets = choose_targets(g, &input.targets, input.seed)?;
    Ok((refs, targets))
}

/// Distances from `refs` to `targets`, reusing `cache` when it holds exactly
/// that matrix and writing it otherwise.
fn cached_distances(g: &Graph, refs: &[usize], targets: &[usize], cache: Option<&Path>, ctx: &mut RunContext) -> Result<DistanceMatrix> {
    if let Some(path) = cache {
        if path.exists() {
            let d = DistanceMatrix::read_cache(path)?;
            if d.reference_ids == refs && d.target_ids == targets {
                ctx.outputs.push(path.to_path_buf());
                return Ok(d);
            }
        }
    }
    let d = ctx.time("distances", || distance_matrix(g, refs, targets))?;
    if let Some(path) = cache {
        d.write_cache(path)?;
        ctx.outputs.push(path.to_path_buf());
    }
    Ok(d)
}

fn fit_config(fit: &FitOpts, k: usize, seed: u64) -> FitConfig {
    FitConfig { k, restarts: fit.restarts, iterations: fit.iters, seed }
}

#[derive(Serialize)]
struct CurveRow {
    k: usize,
    cost: f64,
    knee: bool,
}

fn curve_csv(curve: &[f64], k_star: usize) -> Result<String> {
    let rows: Vec<CurveRow> = curve.iter().enumerate().map(|(i, &cost)| CurveRow { k: i + 1, cost, knee: i + 1 == k_star }).collect();
    csv_string(&rows)
}

#[derive(Serialize)]
struct TraceCostRow {
    restart: usize,
    iteration: usize,
    cost: f64,
    reseeded: bool,
}

fn decompose(a: &DecomposeArgs, ctx: &mut RunContext) -> Result<()> {
    ctx.seed = Some(a.input.seed);
    let lg = load_distance_graph(&a.input)?;
    let g = &lg.graph;
    let (refs, targets) = select_vertices(g, &a.input)?;
    let d = cached_distances(g, &refs, &targets, a.cache.as_deref(), ctx)?;
    let base = fit_config(&a.fit, 1, a.input.seed);
    let k = match a.k {
        Some(k) => k,
        None => {
            let est = ctx.time("estimate-k", || estimate_k(&d, a.k_max.min(d.n()), &base, a.knee_ratio))?;
            if let Some(path) = &a.curve_out {
                ctx.write(path, curve_csv(&est.curve, est.k_star)?)?;
            }
            eprintln!("estimated k = {}", est.k_star);
            est.k_star
        }
    };
    let dec = ctx.time("fit", || regular_decomposition(&d, &FitConfig { k, ..base }))?;
    if let (Some(path), Some(_)) = (&a.curve_out, a.k) {
        let rows: Vec<TraceCostRow> = dec
            .restarts
            .iter()
            .enumerate()
            .flat_map(|(r, t)| {
                t.costs.iter().enumerate().map(move |(i, &cost)| TraceCostRow { restart: r, iteration: i, cost, reseeded: t.reseeded.contains(&i) })
            })
            .collect();
        ctx.write(path, csv_string(&rows)?)?;
    }
    let groups = dec.partition.labels();
    let mut labels: Vec<Option<usize>> = vec![None; g.n()];
    for (&t, &z) in targets.iter().zip(groups) {
        labels[t] = Some(z);
    }
    match a.rest {
        RestPolicy::None => {}
        RestPolicy::Expand => labels = expand_from_targets(g, &targets, groups).labels,
        RestPolicy::Classify => {
            let rest: Vec<usize> = (0..g.n()).filter(|&v| labels[v].is_none()).collect();
            if !rest.is_empty() {
                let extra = ctx.time("rest-distances", || distance_matrix(g, &refs, &rest))?;
                for (j, &v) in rest.iter().enumerate() {
                    let column: Vec<u32> = (0..extra.m()).map(|i| extra.get(i, j)).collect();
                    labels[v] = Some(classify_distances(&dec.model, &column)?);
                }
            }
        }
    }
    eprintln!("k = {k}, cost = {}, best restart {}", dec.model.cost, dec.best_restart);
    ctx.write(&a.labels_out, label_csv(&lg.ids, &labels)?)
}

fn estimate_k_cmd(a: &EstimateKArgs, ctx: &mut RunContext) -> Result<()> {
    ctx.seed = Some(a.input.seed);
    let lg = load_distance_graph(&a.input)?;
    let (refs, targets) = select_vertices(&lg.graph, &a.input)?;
    let d = cached_distances(&lg.graph, &refs, &targets, None, ctx)?;
    let base = fit_config(&a.fit, 1, a.input.seed);
    let est = ctx.time("estimate-k", || estimate_k(&d, a.k_max, &base, a.knee_ratio))?;
    println!("{}", est.k_star);
    ctx.write(&a.curve_out, curve_csv(&est.curve, est.k_star)?)
}

fn distances(a: &DistancesArgs, ctx: &mut RunContext) -> Result<()> {
    ctx.seed = Some(a.input.seed);
    let lg = load_distance_graph(&a.input)?;
    let (refs, targets) = select_vertices(&lg.graph, &a.input)?;
    let d = ctx.time("distances", || distance_matrix(&lg.graph, &refs, &targets))?;
    d.write_cache(&a.out)?;
    ctx.outputs.push(a.out.clone());
    if let Some(path) = &a.csv_out {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once("reference").chain(targets.iter().map(|&t| lg.ids[t].as_str())).collect();
        w.write_record(&header)?;
        for (i, &r) in refs.iter().enumerate() {
            let row: Vec<String> = std::iter::once(lg.ids[r].clone()).chain(d.row(i).iter().map(u32::to_string)).collect();
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        ctx.write(path, bytes)?;
    }
    Ok(())
}

fn reproduce_cmd(cmd: &ReproduceCmd, ctx: &mut RunContext) -> Result<()> {
    match cmd {
        ReproduceCmd::NoiseSweep(a) => {
            ctx.seed = Some(a.seed);
            let opts = a.opts.index_options(a.seed, false);
            let rows = ctx.time("sweep", || reproduce::noise_sweep(&a.sizes, a.clusters, &a.etas, &opts, a.seed))?;
            ctx.write(&a.out_dir.join("noise-sweep.csv"), csv_string(&rows)?)?;
            ctx.write(&a.out_dir.join("noise-sweep-medians.csv"), csv_string(&reproduce::noise_medians(&rows))?)?;
        }
        ReproduceCmd::SearchQuality(a) => {
            ctx.seed = Some(a.seed);
            let opts = a.opts.index_options(a.seed, true);
            let entries = ctx.time("index", || reproduce::benchmark_entries(a.n, &a.clusters, &a.noise, &opts, a.seed))?;
            let quality = reproduce::search_quality(&entries, a.clusters.len(), a.query_seeds, a.k, a.seed)?;
            ctx.write(&a.out_dir.join("search-quality-queries.csv"), csv_string(&quality.queries)?)?;
            ctx.write_json(
                &a.out_dir.join("search-quality.json"),
                &serde_json::json!({ "k": a.k, "map_summary": quality.map_summary, "map_raw": quality.map_raw }),
            )?;
        }
        ReproduceCmd::Planted(a) => {
            ctx.seed = Some(a.seed);
            let spec = PlantedPartitionSpec { n: a.n, a: a.a, b: a.b, seed: a.seed };
            let (g, truth) = reproduce::planted_instance(&spec)?;
            let fit = fit_config(&a.fit, 2, a.seed);
            let mut rows = Vec::new();
            for scheme in &a.refs {
                rows.push(ctx.time(&format!("fit-{scheme}"), || reproduce::planted_run(&g, &truth, scheme, &fit))?);
            }
            ctx.write(&a.out_dir.join("planted.csv"), csv_string(&rows)?)?;
        }
        ReproduceCmd::Knee(a) => {
            ctx.seed = Some(a.seed);
            let (d, _) = block_distance_matrix(&a.sizes, a.intra, a.inter)?;
            let base = fit_config(&a.fit, 1, a.seed);
            let est = ctx.time("estimate-k", || estimate_k(&d, a.k_max, &base, a.knee_ratio))?;
            ctx.write(&a.out_dir.join("knee-curve.csv"), curve_csv(&est.curve, est.k_star)?)?;
            ctx.write_json(&a.out_dir.join("knee.json"), &est)?;
        }
    }
    Ok(())
}

/// Re-runs the command recorded in `manifest` and checks that every output
/// it lists comes out byte-identical.
pub(super) fn replay(manifest: &Path) -> Result<()> {
    let recorded = RunManifest::read(manifest)?;
    let before = recorded.outputs.iter().map(|p| Ok((p.clone(), fs::read(p)?))).collect::<Result<Vec<_>>>()?;
    super::run(&recorded.argv)?;
    let changed: Vec<String> = before
        .iter()
        .filter(|(path, bytes)| fs::read(path).map_or(true, |now| &now != bytes))
        .map(|(path, _)| path.display().to_string())
        .collect();
    if changed.is_empty() {
        eprintln!("{} outputs reproduced", before.len());
        Ok(())
    } else {
        Err(Error::ReplayMismatch(changed.join(", ")))
    }
}
