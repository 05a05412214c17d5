//! Seeded random graph generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyCliqueSpec {
    pub n: usize,
    pub num_c: usize,
    /// Probability of a spurious edge anywhere (the background graph).
    pub eta1: f64,
    /// Probability of dropping an edge inside a cluster.
    pub eta2: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedPartitionSpec {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct NoisyClique {
    pub graph: Graph,
    /// Disjoint union of the clean cliques.
    pub ground_truth: Graph,
    /// Cluster per vertex; `None` for the leftover background vertices.
    pub clusters: Vec<Option<usize>>,
}

/// Calls `hit` with each index in `0..len` independently with probability `p`,
/// jumping over misses with geometric skips.
fn bernoulli_indices(len: usize, p: f64, rng: &mut ChaCha8Rng, mut hit: impl FnMut(usize)) {
    if p <= 0.0 || len == 0 {
        return;
    }
    if p >= 1.0 {
        (0..len).for_each(hit);
        return;
    }
    let log_miss = (1.0 - p).ln();
    let mut i = 0usize;
    loop {
        let u: f64 = rng.gen();
        let skip = ((1.0 - u).ln() / log_miss).floor();
        i = i.saturating_add(skip as usize);
        if i >= len {
            return;
        }
        hit(i);
        i += 1;
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidSpec(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

/// Each unordered pair becomes an edge independently with probability `p`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    check_probability("p", p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        bernoulli_indices(n - u - 1, p, &mut rng, |i| edges.push((u, u + 1 + i)));
    }
    Graph::from_unweighted_edges(n, edges)
}

/// Noisy cliques: an `ER(n, η₁)` background, clusters of `⌊n/num_c⌋`
/// contiguous vertices made complete, then each intra-cluster edge dropped
/// with probability `η₂`.
pub fn synth_graph_gen(spec: &NoisyCliqueSpec) -> Result<NoisyClique> {
    check_probability("eta1", spec.eta1)?;
    check_probability("eta2", spec.eta2)?;
    if spec.num_c == 0 || spec.n / spec.num_c < 2 {
        return Err(Error::InvalidSpec(format!("{} vertices cannot hold {} clusters of size ≥ 2", spec.n, spec.num_c)));
    }
    let n = spec.n;
    let size = n / spec.num_c;
    let clusters: Vec<Option<usize>> = (0..n).map(|v| (v < size * spec.num_c).then_some(v / size)).collect();
    let same = |u: usize, v: usize| clusters[u].is_some() && clusters[u] == clusters[v];

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut edges = Vec::new();
    for u in 0..n {
        bernoulli_indices(n - u - 1, spec.eta1, &mut rng, |i| {
            let v = u + 1 + i;
            if !same(u, v) {
                edges.push((u, v));
            }
        });
    }
    let mut truth = Vec::new();
    for c in 0..spec.num_c {
        let start = c * size;
        for u in start..start + size {
            let row = start + size - u - 1;
            let mut dropped = vec![false; row];
            bernoulli_indices(row, spec.eta2, &mut rng, |i| dropped[i] = true);
            for (i, &drop) in dropped.iter().enumerate() {
                let v = u + 1 + i;
                truth.push((u, v));
                if !drop {
                    edges.push((u, v));
                }
            }
        }
    }
    Ok(NoisyClique {
        graph: Graph::from_unweighted_edges(n, edges)?,
        ground_truth: Graph::from_unweighted_edges(n, truth)?,
        clusters,
    })
}

/// Two equal communities, `[0, n/2)` and `[n/2, n)`, linked with probability
/// `a/n` inside and `b/n` across.
pub fn planted_partition(spec: &PlantedPartitionSpec) -> Result<(Graph, Vec<usize>)> {
    let n = spec.n;
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidSpec(format!("n = {n} must be positive and even")));
    }
    if spec.a < 0.0 || spec.b < 0.0 {
        return Err(Error::InvalidSpec("rates a, b must be non-negative".into()));
    }
    let (p_in, p_out) = (spec.a / n as f64, spec.b / n as f64);
    check_probability("a/n", p_in)?;
    check_probability("b/n", p_out)?;
    let half = n / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut edges = Vec::new();
    for u in 0..n {
        let block_end = if u < half { half } else { n };
        bernoulli_indices(block_end - u - 1, p_in, &mut rng, |i| edges.push((u, u + 1 + i)));
        if u < half {
            bernoulli_indices(n - half, p_out, &mut rng, |i| edges.push((u, half + i)));
        }
    }
    let labels = (0..n).map(|v| usize::from(v >= half)).collect();
    Ok((Graph::from_unweighted_edges(n, edges)?, labels))
}

/// Whether two-community detection is possible: `(a − b)² > 2(a + b)`.
/// Rates are expected to be non-negative.
pub fn kesten_stigum_detectable(a: f64, b: f64) -> bool {
    (a - b).powi(2) > 2.0 * (a + b)
}
