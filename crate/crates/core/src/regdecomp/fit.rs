use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::{bfs_distances, DistanceMatrix};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Group label per target, every group in `0..k` non-empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionMatrix {
    labels: Vec<usize>,
    k: usize,
}

impl PartitionMatrix {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        let mut counts = vec![0usize; k];
        for &z in &labels {
            if z >= k {
                return Err(Error::InvalidArgument(format!("label {z} outside 0..{k}")));
            }
            counts[z] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyGroup(empty));
        }
        Ok(PartitionMatrix { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Group-mean distances `Λ̂` (`m x k`, row-major) and the cost `L(R)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDistanceModel {
    pub m: usize,
    pub k: usize,
    pub lambda: Vec<f64>,
    pub cost: f64,
}

impl BlockDistanceModel {
    pub fn lambda(&self, i: usize, v: usize) -> f64 {
        self.lambda[i * self.k + v]
    }
}

fn lambda_from_labels(d: &DistanceMatrix, labels: &[usize], k: usize) -> std::result::Result<Vec<f64>, usize> {
    let (m, n) = (d.m(), d.n());
    let mut counts = vec![0usize; k];
    for &z in labels {
        counts[z] += 1;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(empty);
    }
    let floor = 1.0 / (2.0 * n as f64);
    let mut lambda = vec![0.0; m * k];
    for i in 0..m {
        let row = d.row(i);
        let out = &mut lambda[i * k..(i + 1) * k];
        let mut sums = vec![0u64; k];
        for (&dist, &z) in row.iter().zip(labels) {
            sums[z] += u64::from(dist);
        }
        for v in 0..k {
            let mean = sums[v] as f64 / counts[v] as f64;
            out[v] = if mean > 0.0 { mean } else { floor };
        }
    }
    Ok(lambda)
}

/// `Λ̂_{iv}`: mean distance from reference `i` to the targets of group `v`.
/// Zero means are replaced by `1/(2n)` so logarithms stay finite.
pub fn lambda_hat(d: &DistanceMatrix, r: &PartitionMatrix) -> Result<Vec<f64>> {
    if r.labels.len() != d.n() {
        return Err(Error::DimensionMismatch { left: r.labels.len(), right: d.n() });
    }
    lambda_from_labels(d, &r.labels, r.k).map_err(Error::EmptyGroup)
}

/// `ℓ_{jv} = Σ_i (Λ̂_{iv} − D_{ij} ln Λ̂_{iv})`.
pub fn node_cost(d: &DistanceMatrix, lambda: &[f64], k: usize, j: usize, v: usize) -> f64 {
    (0..d.m())
        .map(|i| {
            let l = lambda[i * k + v];
            l - f64::from(d.get(i, j)) * l.ln()
        })
        .sum()
}

/// All `ℓ_{jv}` as an `n x k` row-major matrix.
fn cost_matrix(d: &DistanceMatrix, lambda: &[f64], k: usize) -> Vec<f64> {
    let (m, n) = (d.m(), d.n());
    let logs: Vec<f64> = lambda.iter().map(|l| l.ln()).collect();
    let mut base = vec![0.0; k];
    for i in 0..m {
        for v in 0..k {
            base[v] += lambda[i * k + v];
        }
    }
    let chunk = 256;
    let mut costs = vec![0.0; n * k];
    costs.par_chunks_mut(chunk * k).enumerate().for_each(|(c, out)| {
        let start = c * chunk;
        let width = out.len() / k;
        for i in 0..m {
            let row = &d.row(i)[start..start + width];
            let log_row = &logs[i * k..(i + 1) * k];
            for (j, &dist) in row.iter().enumerate() {
                if dist != 0 {
                    let dist = f64::from(dist);
                    for v in 0..k {
                        out[j * k + v] -= dist * log_row[v];
                    }
                }
            }
        }
        for j in 0..width {
            for v in 0..k {
                out[j * k + v] += base[v];
            }
        }
    });
    costs
}

/// `L(R) = Σ_j ℓ_{j, Z_j}` with `Λ̂` estimated from `R`.
pub fn total_cost(d: &DistanceMatrix, r: &PartitionMatrix) -> Result<f64> {
    let lambda = lambda_hat(d, r)?;
    let costs = cost_matrix(d, &lambda, r.k);
    Ok(r.labels.iter().enumerate().map(|(j, &z)| costs[j * r.k + z]).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub k: usize,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { k: 2, restarts: 20, iterations: 50, seed: 0 }
    }
}

/// Cost history of one restart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    /// `L(R_t)` for the initial partition and after each full iteration.
    pub costs: Vec<f64>,
    /// Indices `t` into `costs` whose partition followed an empty-group re-seed.
    pub reseeded: Vec<usize>,
    pub converged: bool,
}

impl RestartTrace {
    /// Iterations `t` with `L(R_t) > L(R_{t-1})` beyond rounding, skipping
    /// those right after a re-seed.
    pub fn cost_increases(&self) -> Vec<usize> {
        (1..self.costs.len())
            .filter(|&t| {
                let (prev, cur) = (self.costs[t - 1], self.costs[t]);
                !self.reseeded.contains(&t) && cur - prev > 1e-9 * prev.abs().max(1.0)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub partition: PartitionMatrix,
    pub model: BlockDistanceModel,
    pub best_restart: usize,
    pub restarts: Vec<RestartTrace>,
}

fn initial_labels(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    for _ in 0..100 {
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let mut seen = vec![false; k];
        labels.iter().for_each(|&z| seen[z] = true);
        if seen.iter().all(|&s| s) {
            return labels;
        }
    }
    // k close to n makes rejection hopeless: place one target per group first
    let mut labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(&mut order[..], rng);
    for (v, &j) in order.iter().take(k).enumerate() {
        labels[j] = v;
    }
    labels
}

/// Gives every empty group the target with the highest current cost, drawn
/// from groups that keep at least one member.
fn reseed_empty(labels: &mut [usize], costs: &[f64], k: usize) -> bool {
    let mut counts = vec![0usize; k];
    labels.iter().for_each(|&z| counts[z] += 1);
    let mut changed = false;
    for v in 0..k {
        if counts[v] > 0 {
            continue;
        }
        let donor = (0..labels.len())
            .filter(|&j| counts[labels[j]] > 1)
            .max_by(|&a, &b| costs[a * k + labels[a]].total_cmp(&costs[b * k + labels[b]]).then(b.cmp(&a)));
        if let Some(j) = donor {
            counts[labels[j]] -= 1;
            labels[j] = v;
            counts[v] = 1;
            changed = true;
        }
    }
    changed
}

fn argmin_row(row: &[f64]) -> usize {
    let mut best = 0;
    for v in 1..row.len() {
        if row[v] < row[best] {
            best = v;
        }
    }
    best
}

fn run_restart(d: &DistanceMatrix, cfg: &FitConfig, restart: usize) -> Option<(Vec<usize>, Vec<f64>, f64, RestartTrace)> {
    let (n, k) = (d.n(), cfg.k);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let mut labels = initial_labels(n, k, &mut rng);
    let mut trace = RestartTrace { costs: Vec::new(), reseeded: Vec::new(), converged: false };
    let mut pending_reseed = false;
    for _ in 0..=cfg.iterations {
        let lambda = lambda_from_labels(d, &labels, k).ok()?;
        let costs = cost_matrix(d, &lambda, k);
        let cost: f64 = labels.iter().enumerate().map(|(j, &z)| costs[j * k + z]).sum();
        if !cost.is_finite() {
            return None;
        }
        if pending_reseed {
            trace.reseeded.push(trace.costs.len());
        }
        trace.costs.push(cost);
        if trace.costs.len() > cfg.iterations {
            return Some((labels, lambda, cost, trace));
        }
        let mut next: Vec<usize> = (0..n).map(|j| argmin_row(&costs[j * k..(j + 1) * k])).collect();
        pending_reseed = reseed_empty(&mut next, &costs, k);
        if next == labels {
            trace.converged = true;
            return Some((labels, lambda, cost, trace));
        }
        labels = next;
    }
    unreachable!("loop returns after the final iteration")
}

/// Alternates group-mean estimation and per-target reassignment from several
/// seeded random starts, keeping the lowest final cost (earliest restart on
/// ties). Restarts run in parallel; the result depends only on the seed.
pub fn regular_decomposition(d: &DistanceMatrix, cfg: &FitConfig) -> Result<Decomposition> {
    if cfg.k == 0 || cfg.k > d.n() {
        return Err(Error::InvalidArgument(format!("k = {} must lie in 1..={}", cfg.k, d.n())));
    }
    if cfg.restarts == 0 || cfg.iterations == 0 {
        return Err(Error::InvalidArgument("restarts and iterations must be positive".into()));
    }
    let runs: Vec<_> = (0..cfg.restarts).into_par_iter().map(|r| run_restart(d, cfg, r)).collect();
    let mut best: Option<(usize, &(Vec<usize>, Vec<f64>, f64, RestartTrace))> = None;
    for (r, run) in runs.iter().enumerate() {
        if let Some(run) = run {
            if best.map_or(true, |(_, b)| run.2 < b.2) {
                best = Some((r, run));
            }
        }
    }
    let (best_restart, (labels, lambda, cost, _)) = best.ok_or(Error::DegenerateFit)?;
    let model = BlockDistanceModel { m: d.m(), k: cfg.k, lambda: lambda.clone(), cost: *cost };
    let partition = PartitionMatrix::new(labels.clone(), cfg.k)?;
    let restarts = runs.into_iter().flatten().map(|r| r.3).collect();
    Ok(Decomposition { partition, model, best_restart, restarts })
}

/// Group minimizing `Σ_j (Λ̂_{jβ} − D_j ln Λ̂_{jβ})` for a vector of distances
/// to the references; lowest group on ties.
pub fn classify_distances(model: &BlockDistanceModel, distances: &[u32]) -> Result<usize> {
    if distances.len() != model.m {
        return Err(Error::DimensionMismatch { left: distances.len(), right: model.m });
    }
    let costs: Vec<f64> = (0..model.k)
        .map(|v| {
            distances
                .iter()
                .enumerate()
                .map(|(i, &dist)| {
                    let l = model.lambda(i, v);
                    l - f64::from(dist) * l.ln()
                })
                .sum()
        })
        .collect();
    Ok(argmin_row(&costs))
}

/// Classifies vertex `i` of `g` from its hop distances to `refs`.
pub fn classify_out_of_sample(g: &Graph, model: &BlockDistanceModel, refs: &[usize], i: usize) -> Result<usize> {
    let dist = bfs_distances(g, i);
    let to_refs = refs
        .iter()
        .map(|&r| if dist[r] == u32::MAX { Err(Error::Unreachable { origin: i, target: r }) } else { Ok(dist[r]) })
        .collect::<Result<Vec<u32>>>()?;
    classify_distances(model, &to_refs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KneeEstimate {
    pub k_star: usize,
    /// `L(k)` for `k = 1..=k_max`.
    pub curve: Vec<f64>,
}

/// Smallest `k` after which every relative improvement
/// `(L(k') − L(k'+1)) / (L(1) − L(k'+1) + floor)` stays below `ratio`.
pub fn knee_point(curve: &[f64], ratio: f64) -> usize {
    let Some(&first) = curve.first() else { return 0 };
    let floor = 1e-12 * first.abs().max(1.0);
    let mut k_star = 1;
    for k in 1..curve.len() {
        let gain = (curve[k - 1] - curve[k]) / (first - curve[k] + floor);
        if gain >= ratio {
            k_star = k + 1;
        }
    }
    k_star
}

/// Fits `k = 1..=k_max` and locates the knee of the cost curve.
pub fn estimate_k(d: &DistanceMatrix, k_max: usize, base: &FitConfig, ratio: f64) -> Result<KneeEstimate> {
    if k_max == 0 || k_max > d.n() {
        return Err(Error::InvalidArgument(format!("k_max = {k_max} must lie in 1..={}", d.n())));
    }
    let curve = (1..=k_max)
        .map(|k| Ok(regular_decomposition(d, &FitConfig { k, ..base.clone() })?.model.cost))
        .collect::<Result<Vec<f64>>>()?;
    Ok(KneeEstimate { k_star: knee_point(&curve, ratio), curve })
}
