//! Experiment protocols shared by `reproduce` and the acceptance harness.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::generators::{planted_partition, synth_graph_gen, NoisyCliqueSpec, PlantedPartitionSpec};
use crate::graph::Graph;
use crate::regdecomp::{
    distance_matrix, misclassification, regular_decomposition, sample_references, DistanceMatrix, FitConfig,
    ReferenceScheme, RestartTrace,
};
use crate::regularity::summarize;
use crate::search::{index_graph, map_at_k, rank, DatabaseEntry, IndexOptions, SearchMode};
use crate::summary::{blow_up, build_reduced_graph, reconstruction_error};

/// Reconstruction errors for one noisy-clique instance. Both errors are taken
/// over the vertices the summary keeps, in blow-up order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSetting {
    pub n: usize,
    pub eta1: f64,
    pub eta2: f64,
    pub k: usize,
    pub retained: usize,
    /// `l₂(G′, GT)` for the blown-up summary.
    pub l2_summary: f64,
    /// `l₂(G, GT)` for the noisy input.
    pub l2_noisy: f64,
    pub l2_summary_norm: f64,
    pub l2_noisy_norm: f64,
}

/// Summarizes one noisy-clique graph and scores the blow-up against the clean graph.
pub fn noise_setting(spec: &NoisyCliqueSpec, opts: &IndexOptions) -> Result<NoiseSetting> {
    let instance = synth_graph_gen(spec)?;
    let cfg = &opts.summarization;
    let summarized = summarize(&instance.graph, cfg)?;
    let d_prime = opts.d_prime.unwrap_or(cfg.epsilon);
    let reduced = build_reduced_graph(&instance.graph, &summarized.best, &summarized.verdicts, d_prime, opts.weight_rule)?;
    let kept = reduced.retained_vertices().expect("fresh summaries keep their members");
    let rebuilt = blow_up(&reduced);
    let truth = instance.ground_truth.induced_subgraph(&kept)?;
    let noisy = instance.graph.induced_subgraph(&kept)?;
    let l2_summary = reconstruction_error(&rebuilt, &truth, 2.0)?;
    let l2_noisy = reconstruction_error(&noisy, &truth, 2.0)?;
    let area = (kept.len() * kept.len()).max(1) as f64;
    Ok(NoiseSetting {
        n: spec.n,
        eta1: spec.eta1,
        eta2: spec.eta2,
        k: reduced.k(),
        retained: kept.len(),
        l2_summary,
        l2_noisy,
        l2_summary_norm: l2_summary / area,
        l2_noisy_norm: l2_noisy / area,
    })
}

/// Every `(η₁, η₂)` pair of `etas` at each size. Instance seeds are
/// `seed + position` in grid order.
pub fn noise_sweep(sizes: &[usize], clusters: usize, etas: &[f64], opts: &IndexOptions, seed: u64) -> Result<Vec<NoiseSetting>> {
    let mut specs = Vec::new();
    for &n in sizes {
        for &eta1 in etas {
            for &eta2 in etas {
                let position = specs.len() as u64;
                specs.push(NoisyCliqueSpec { n, num_c: clusters, eta1, eta2, seed: seed.wrapping_add(position) });
            }
        }
    }
    specs.iter().map(|spec| noise_setting(spec, opts)).collect()
}

/// Per-size medians of the normalized errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseMedian {
    pub n: usize,
    pub median_l2_summary_norm: f64,
    pub median_l2_noisy_norm: f64,
    pub settings: usize,
    pub summary_wins: usize,
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2.0
    }
}

pub fn noise_medians(rows: &[NoiseSetting]) -> Vec<NoiseMedian> {
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.n).collect();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| {
            let group: Vec<&NoiseSetting> = rows.iter().filter(|r| r.n == n).collect();
            NoiseMedian {
                n,
                median_l2_summary_norm: median(group.iter().map(|r| r.l2_summary_norm).collect()),
                median_l2_noisy_norm: median(group.iter().map(|r| r.l2_noisy_norm).collect()),
                settings: group.len(),
                summary_wins: group.iter().filter(|r| r.l2_summary < r.l2_noisy).count(),
            }
        })
        .collect()
}

/// One ranked query of the search benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchQuery {
    pub query_seed: u64,
    pub group: usize,
    pub query_id: String,
    pub ap_summary: f64,
    pub ap_raw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchQuality {
    pub map_summary: f64,
    pub map_raw: f64,
    pub queries: Vec<SearchQuery>,
}

/// Benchmark graph ids are `c{clusters}-i{eta1}-o{eta2}`; the group of a graph
/// is its cluster count.
pub fn benchmark_entries(n: usize, clusters: &[usize], noise: &[f64], opts: &IndexOptions, seed: u64) -> Result<Vec<(usize, DatabaseEntry)>> {
    let mut specs = Vec::new();
    for (group, &c) in clusters.iter().enumerate() {
        for &intra in noise {
            for &inter in noise {
                let position = specs.len() as u64;
                let spec = NoisyCliqueSpec { n, num_c: c, eta1: inter, eta2: intra, seed: seed.wrapping_add(position) };
                specs.push((group, format!("c{c}-i{intra}-o{inter}"), spec));
            }
        }
    }
    let opts = IndexOptions { keep_raw_spectrum: true, ..opts.clone() };
    specs
        .par_iter()
        .map(|(group, id, spec)| {
            let g = synth_graph_gen(spec)?.graph;
            let meta = serde_json::to_value(spec)?;
            Ok((*group, index_graph(id, &g, &opts, Some(meta))?))
        })
        .collect()
}

/// Samples one query per group for each query seed and scores both search
/// modes by MAP@k, treating the query's group as the relevant set.
pub fn search_quality(entries: &[(usize, DatabaseEntry)], groups: usize, query_seeds: u64, k: usize, seed: u64) -> Result<SearchQuality> {
    let stored: Vec<DatabaseEntry> = entries.iter().map(|(_, e)| e.clone()).collect();
    let mut queries = Vec::new();
    let mut summary_sets = Vec::new();
    let mut raw_sets = Vec::new();
    for s in 0..query_seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ s.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        for group in 0..groups {
            let members: Vec<&DatabaseEntry> = entries.iter().filter(|(g, _)| *g == group).map(|(_, e)| e).collect();
            let relevant: HashSet<String> = members.iter().map(|e| e.id.clone()).collect();
            let Some(query) = members.choose(&mut rng) else { continue };
            let by_summary = rank(&query.spectrum, &stored, k, None, SearchMode::Summary)?;
            let raw_query = query.raw_spectrum.as_ref().expect("benchmark keeps raw spectra");
            let by_raw = rank(raw_query, &stored, k, None, SearchMode::Raw)?;
            let ids = |r: Vec<(String, f64)>| r.into_iter().map(|(id, _)| id).collect::<Vec<_>>();
            let (summary_ids, raw_ids) = (ids(by_summary), ids(by_raw));
            queries.push(SearchQuery {
                query_seed: s,
                group,
                query_id: query.id.clone(),
                ap_summary: crate::search::ap_at_k(&summary_ids, &relevant, k)?,
                ap_raw: crate::search::ap_at_k(&raw_ids, &relevant, k)?,
            });
            summary_sets.push((summary_ids, relevant.clone()));
            raw_sets.push((raw_ids, relevant));
        }
    }
    Ok(SearchQuality { map_summary: map_at_k(&summary_sets, k)?, map_raw: map_at_k(&raw_sets, k)?, queries })
}

/// Recovery of a planted partition with one reference scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedRun {
    pub refs: String,
    pub m: usize,
    pub targets: usize,
    pub misclassification: f64,
    pub cost: f64,
    pub best_restart: usize,
    /// Iterations whose cost rose, summed over restarts; re-seeds exempt.
    pub cost_increases: usize,
    pub reseeds: usize,
    #[serde(skip)]
    pub traces: Vec<RestartTrace>,
}

/// Planted instance restricted to its largest component, with ground truth.
pub fn planted_instance(spec: &PlantedPartitionSpec) -> Result<(Graph, Vec<usize>)> {
    let (g, truth) = planted_partition(spec)?;
    let keep = g.largest_component();
    let truth = keep.iter().map(|&v| truth[v]).collect();
    Ok((g.induced_subgraph(&keep)?, truth))
}

/// Fits `k = 2` on `refs × all vertices` and scores the labels.
pub fn planted_run(g: &Graph, truth: &[usize], scheme: &str, fit: &FitConfig) -> Result<PlantedRun> {
    let refs = sample_references(g, scheme.parse::<ReferenceScheme>()?, fit.seed)?;
    let targets: Vec<usize> = (0..g.n()).collect();
    let d = distance_matrix(g, &refs, &targets)?;
    planted_fit(&d, truth, scheme, fit)
}

pub fn planted_fit(d: &DistanceMatrix, truth: &[usize], scheme: &str, fit: &FitConfig) -> Result<PlantedRun> {
    let dec = regular_decomposition(d, fit)?;
    Ok(PlantedRun {
        refs: scheme.to_string(),
        m: d.m(),
        targets: d.n(),
        misclassification: misclassification(dec.partition.labels(), truth, fit.k),
        cost: dec.model.cost,
        best_restart: dec.best_restart,
        cost_increases: dec.restarts.iter().map(|t| t.cost_increases().len()).sum(),
        reseeds: dec.restarts.iter().map(|t| t.reseeded.len()).sum(),
        traces: dec.restarts,
    })
}

/// Noiseless block distance matrix: `intra` within a block, `inter` across, 0 on the diagonal.
pub fn block_distance_matrix(sizes: &[usize], intra: u32, inter: u32) -> Result<(DistanceMatrix, Vec<usize>)> {
    let truth: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat(b).take(s)).collect();
    let n = truth.len();
    let rows: Vec<Vec<u32>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0 } else if truth[i] == truth[j] { intra } else { inter }).collect())
        .collect();
    Ok((DistanceMatrix::from_nested(&rows)?, truth))
}
