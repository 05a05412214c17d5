use std::collections::VecDeque;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

const UNREACHED: u32 = u32::MAX;
const CACHE_MAGIC: u64 = u64::from_le_bytes(*b"RPDIST01");

/// Hop distances from `m` reference vertices (rows) to `n` targets (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    m: usize,
    n: usize,
    values: Vec<u32>,
    pub reference_ids: Vec<usize>,
    pub target_ids: Vec<usize>,
}

impl DistanceMatrix {
    /// Row-major `m x n` values.
    pub fn from_rows(values: Vec<u32>, reference_ids: Vec<usize>, target_ids: Vec<usize>) -> Result<Self> {
        let (m, n) = (reference_ids.len(), target_ids.len());
        if values.len() != m * n {
            return Err(Error::DimensionMismatch { left: values.len(), right: m * n });
        }
        Ok(DistanceMatrix { m, n, values, reference_ids, target_ids })
    }

    /// Builds a matrix from nested rows, numbering references and targets from 0.
    pub fn from_nested(rows: &[Vec<u32>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("ragged distance rows".into()));
        }
        Self::from_rows(rows.concat(), (0..rows.len()).collect(), (0..n).collect())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Keeps only the listed target columns, in the given order.
    pub fn select_targets(&self, columns: &[usize]) -> DistanceMatrix {
        let mut values = Vec::with_capacity(self.m * columns.len());
        for i in 0..self.m {
            let row = self.row(i);
            values.extend(columns.iter().map(|&j| row[j]));
        }
        DistanceMatrix {
            m: self.m,
            n: columns.len(),
            values,
            reference_ids: self.reference_ids.clone(),
            target_ids: columns.iter().map(|&j| self.target_ids[j]).collect(),
        }
    }

    /// Binary cache: three little-endian `u64` words (magic, m, n), the
    /// row-major `u32` values, then reference and target ids as `u64`.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(24 + 4 * self.values.len() + 8 * (self.m + self.n));
        for word in [CACHE_MAGIC, self.m as u64, self.n as u64] {
            out.extend_from_slice(&word.to_le_bytes());
        }
        for &v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for &id in self.reference_ids.iter().chain(&self.target_ids) {
            out.extend_from_slice(&(id as u64).to_le_bytes());
        }
        fs::File::create(path)?.write_all(&out)?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        let corrupt = || Error::InvalidArgument(format!("{} is not a distance cache", path.display()));
        let word = |at: usize| -> Result<u64> {
            let chunk = bytes.get(at..at + 8).ok_or_else(corrupt)?;
            Ok(u64::from_le_bytes(chunk.try_into().expect("8 bytes")))
        };
        if word(0)? != CACHE_MAGIC {
            return Err(corrupt());
        }
        let (m, n) = (word(8)? as usize, word(16)? as usize);
        let body = 24 + 4 * m * n;
        if bytes.len() != body + 8 * (m + n) {
            return Err(corrupt());
        }
        let values = bytes[24..body].chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
        let ids: Vec<usize> = bytes[body..].chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")) as usize).collect();
        Self::from_rows(values, ids[..m].to_vec(), ids[m..].to_vec())
    }
}

/// Breadth-first hop distances from `source`; unreachable vertices get `u32::MAX`.
pub fn bfs_distances(g: &Graph, source: usize) -> Vec<u32> {
    let mut dist = vec![UNREACHED; g.n()];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u] + 1;
        for &(v, _) in g.neighbors(u) {
            if dist[v] == UNREACHED {
                dist[v] = next;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// One BFS per reference, evaluated in parallel.
pub fn distance_matrix(g: &Graph, refs: &[usize], targets: &[usize]) -> Result<DistanceMatrix> {
    for &v in refs.iter().chain(targets) {
        if v >= g.n() {
            return Err(Error::InvalidArgument(format!("vertex {v} outside 0..{}", g.n())));
        }
    }
    let rows = refs
        .par_iter()
        .map(|&r| {
            let dist = bfs_distances(g, r);
            targets
                .iter()
                .map(|&t| if dist[t] == UNREACHED { Err(Error::Unreachable { origin: r, target: t }) } else { Ok(dist[t]) })
                .collect::<Result<Vec<u32>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    DistanceMatrix::from_rows(rows.concat(), refs.to_vec(), targets.to_vec())
}

/// How reference vertices are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceScheme {
    /// `m` distinct vertices drawn uniformly.
    Uniform(usize),
    /// All vertices on one shortest path per random vertex pair.
    PathCover(usize),
    All,
}

impl std::str::FromStr for ReferenceScheme {
    type Err = Error;

    /// Parses `all`, `uniform:M` or `paths:P`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("reference scheme `{s}`: expected all, uniform:M or paths:P"));
        if s == "all" {
            return Ok(ReferenceScheme::All);
        }
        let (kind, count) = s.split_once(':').ok_or_else(bad)?;
        let count: usize = count.parse().map_err(|_| bad())?;
        match kind {
            "uniform" => Ok(ReferenceScheme::Uniform(count)),
            "paths" => Ok(ReferenceScheme::PathCover(count)),
            _ => Err(bad()),
        }
    }
}

/// Reference vertices in increasing order.
pub fn sample_references(g: &Graph, scheme: ReferenceScheme, seed: u64) -> Result<Vec<usize>> {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match scheme {
        ReferenceScheme::All => Ok((0..n).collect()),
        ReferenceScheme::Uniform(m) => {
            if m > n {
                return Err(Error::InvalidArgument(format!("{m} references requested from {n} vertices")));
            }
            let mut refs = sample(&mut rng, n, m).into_vec();
            refs.sort_unstable();
            Ok(refs)
        }
        ReferenceScheme::PathCover(pairs) => {
            if n < 2 {
                return Err(Error::InvalidArgument("path cover needs at least two vertices".into()));
            }
            let chosen: Vec<(usize, usize)> = (0..pairs)
                .map(|_| {
                    let u = rng.gen_range(0..n);
                    let mut v = rng.gen_range(0..n - 1);
                    if v >= u {
                        v += 1;
                    }
                    (u, v)
                })
                .collect();
            path_cover(g, &chosen)
        }
    }
}

/// Union of one shortest path per pair. Paths follow BFS parents, which are
/// discovered in increasing neighbor order.
pub fn path_cover(g: &Graph, pairs: &[(usize, usize)]) -> Result<Vec<usize>> {
    let mut on_path = vec![false; g.n()];
    for &(source, target) in pairs {
        let mut parent = vec![usize::MAX; g.n()];
        let mut queue = VecDeque::new();
        parent[source] = source;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            if u == target {
                break;
            }
            for &(v, _) in g.neighbors(u) {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[target] == usize::MAX {
            return Err(Error::Unreachable { origin: source, target });
        }
        let mut v = target;
        on_path[v] = true;
        while v != source {
            v = parent[v];
            on_path[v] = true;
        }
    }
    Ok((0..g.n()).filter(|&v| on_path[v]).collect())
}
