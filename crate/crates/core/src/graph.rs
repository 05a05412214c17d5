//! Undirected weighted simple graphs and the density statistics used by the
//! regularity machinery.
//!
//! Edge weights live in `(0, 1]`; an unweighted graph is a graph whose weights
//! are all `1`. Every graph keeps sorted adjacency lists. Graphs with at most
//! [`DEFAULT_DENSE_THRESHOLD`] vertices additionally keep a bit matrix so that
//! `weight(u, v)` is a constant-time lookup.

use std::collections::VecDeque;

use faer::Mat;

use crate::error::{precondition, Result};

pub const DEFAULT_DENSE_THRESHOLD: usize = 20_000;

#[derive(Clone, Debug)]
struct BitMatrix {
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        let words_per_row = n.div_ceil(64);
        BitMatrix { words_per_row, bits: vec![0; words_per_row * n] }
    }

    #[inline]
    fn set(&mut self, u: usize, v: usize) {
        self.bits[u * self.words_per_row + v / 64] |= 1 << (v % 64);
    }

    #[inline]
    fn get(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words_per_row + v / 64] >> (v % 64) & 1 == 1
    }
}

/// Undirected weighted graph without self-loops. Immutable once built.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    adjacency: Vec<Vec<(usize, f64)>>,
    dense: Option<BitMatrix>,
    weighted: bool,
    edge_count: usize,
}

/// Accumulates edges and produces a [`Graph`].
///
/// Repeated edges collapse, the last weight wins. Zero weights drop the edge.
#[derive(Clone, Debug)]
pub struct GraphBuilder {
    n: usize,
    dense_threshold: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Self {
        GraphBuilder { n, dense_threshold: DEFAULT_DENSE_THRESHOLD, edges: Vec::new() }
    }

    pub fn dense_threshold(mut self, threshold: usize) -> Self {
        self.dense_threshold = threshold;
        self
    }

    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) -> &mut Self {
        self.edges.push((u, v, weight));
        self
    }

    pub fn build(self) -> Result<Graph> {
        let n = self.n;
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(u, v, w) in &self.edges {
            if u >= n || v >= n {
                return precondition(format!("edge ({u}, {v}) outside vertex range 0..{n}"));
            }
            if u == v {
                return precondition(format!("self-loop on vertex {u}"));
            }
            if !(0.0..=1.0).contains(&w) || w.is_nan() {
                return precondition(format!("edge ({u}, {v}) has weight {w} outside [0, 1]"));
            }
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        let mut weighted = false;
        let mut edge_count = 0;
        for list in &mut adjacency {
            // stable sort keeps insertion order among duplicates, so the last one wins
            list.sort_by_key(|&(v, _)| v);
            let mut dedup: Vec<(usize, f64)> = Vec::with_capacity(list.len());
            for &(v, w) in list.iter() {
                match dedup.last_mut() {
                    Some(last) if last.0 == v => last.1 = w,
                    _ => dedup.push((v, w)),
                }
            }
            dedup.retain(|&(_, w)| w > 0.0);
            weighted |= dedup.iter().any(|&(_, w)| w != 1.0);
            edge_count += dedup.len();
            *list = dedup;
        }
        let dense = (n <= self.dense_threshold).then(|| {
            let mut bits = BitMatrix::new(n);
            for (u, list) in adjacency.iter().enumerate() {
                for &(v, _) in list {
                    bits.set(u, v);
                }
            }
            bits
        });
        Ok(Graph { n, adjacency, dense, weighted, edge_count: edge_count / 2 })
    }
}

impl Graph {
    pub fn builder(n: usize) -> GraphBuilder {
        GraphBuilder::new(n)
    }

    /// Builds a graph from `(u, v, weight)` triples.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Graph> {
        let mut builder = GraphBuilder::new(n);
        builder.edges.extend(edges);
        builder.build()
    }

    /// Builds an unweighted graph from vertex pairs.
    pub fn from_unweighted_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Graph> {
        Graph::from_edges(n, edges.into_iter().map(|(u, v)| (u, v, 1.0)))
    }

    pub fn empty(n: usize) -> Graph {
        Graph::from_edges(n, std::iter::empty()).expect("edgeless graph is always valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }

    /// Weight of edge `{u, v}`, `0` when absent.
    #[inline]
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        if let Some(bits) = &self.dense {
            if !bits.get(u, v) {
                return 0.0;
            }
            if !self.weighted {
                return 1.0;
            }
        }
        let list = &self.adjacency[u];
        match list.binary_search_by_key(&v, |&(x, _)| x) {
            Ok(pos) => list[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v) > 0.0
    }

    /// Neighbors of `u` with edge weights, sorted by vertex index.
    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn weighted_degree(&self, u: usize) -> f64 {
        self.adjacency[u].iter().map(|&(_, w)| w).sum()
    }

    /// Iterates each undirected edge once as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter().filter(move |&&(v, _)| v > u).map(move |&(v, w)| (u, v, w))
        })
    }

    /// Subgraph induced by `vertices`; vertex `i` of the result is `vertices[i]`.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<Graph> {
        let mut position = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.n {
                return precondition(format!("vertex {v} outside 0..{}", self.n));
            }
            if position[v] != usize::MAX {
                return precondition(format!("vertex {v} listed twice"));
            }
            position[v] = i;
        }
        let mut edges = Vec::new();
        for (i, &v) in vertices.iter().enumerate() {
            for &(x, w) in &self.adjacency[v] {
                let j = position[x];
                if j != usize::MAX && i < j {
                    edges.push((i, j, w));
                }
            }
        }
        Graph::from_edges(vertices.len(), edges)
    }

    /// Component label per vertex, labels numbered in order of their smallest vertex.
    pub fn connected_components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Vertices of the largest connected component in increasing order; ties
    /// go to the component containing the smallest vertex.
    pub fn largest_component(&self) -> Vec<usize> {
        let labels = self.connected_components();
        let count = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0usize; count];
        for &l in &labels {
            sizes[l] += 1;
        }
        let Some(best) = (0..count).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))) else {
            return Vec::new();
        };
        (0..self.n).filter(|&v| labels[v] == best).collect()
    }

    /// Dense `|rows| x |cols|` weight block.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Mat<f64> {
        let mut out = Mat::<f64>::zeros(rows.len(), cols.len());
        if self.dense.is_some() && rows.len() * cols.len() <= 4 * rows.iter().map(|&r| self.degree(r)).sum::<usize>() {
            for (i, &r) in rows.iter().enumerate() {
                for (j, &c) in cols.iter().enumerate() {
                    out[(i, j)] = self.weight(r, c);
                }
            }
        } else {
            let mut position = vec![usize::MAX; self.n];
            for (j, &c) in cols.iter().enumerate() {
                position[c] = j;
            }
            for (i, &r) in rows.iter().enumerate() {
                for &(v, w) in &self.adjacency[r] {
                    let j = position[v];
                    if j != usize::MAX {
                        out[(i, j)] = w;
                    }
                }
            }
        }
        out
    }
}

/// Ordered set of distinct vertex indices.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VertexClass(Vec<usize>);

impl VertexClass {
    /// Validates distinctness and the range `[0, n)`.
    pub fn new(members: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for &v in &members {
            if v >= n {
                return precondition(format!("vertex {v} outside 0..{n}"));
            }
            if std::mem::replace(&mut seen[v], true) {
                return precondition(format!("vertex {v} repeated in class"));
            }
        }
        Ok(VertexClass(members))
    }

    /// Wraps members without validation. Callers guarantee distinctness.
    pub(crate) fn from_vec_unchecked(members: Vec<usize>) -> Self {
        VertexClass(members)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl From<VertexClass> for Vec<usize> {
    fn from(c: VertexClass) -> Self {
        c.0
    }
}

fn membership(g: &Graph, class: &VertexClass) -> Result<Vec<bool>> {
    let mut mask = vec![false; g.n()];
    for &v in class.members() {
        if v >= g.n() {
            return precondition(format!("vertex {v} outside 0..{}", g.n()));
        }
        mask[v] = true;
    }
    Ok(mask)
}

fn check_disjoint(g: &Graph, a: &VertexClass, b: &VertexClass) -> Result<Vec<bool>> {
    if a.is_empty() || b.is_empty() {
        return precondition("classes must be non-empty");
    }
    let mask_b = membership(g, b)?;
    for &v in a.members() {
        if v >= g.n() {
            return precondition(format!("vertex {v} outside 0..{}", g.n()));
        }
        if mask_b[v] {
            return precondition(format!("vertex {v} belongs to both classes"));
        }
    }
    Ok(mask_b)
}

/// Total edge weight between two disjoint classes.
pub(crate) fn cross_weight(g: &Graph, a: &[usize], mask_b: &[bool]) -> f64 {
    a.iter()
        .flat_map(|&x| g.neighbors(x))
        .filter(|&&(y, _)| mask_b[y])
        .map(|&(_, w)| w)
        .sum()
}

/// `e(a, b) / (|a| |b|)`, with `e` the total weight of edges across the pair.
pub fn edge_density(g: &Graph, a: &VertexClass, b: &VertexClass) -> Result<f64> {
    let mask_b = check_disjoint(g, a, b)?;
    Ok(cross_weight(g, a.members(), &mask_b) / (a.len() as f64 * b.len() as f64))
}

/// `e(a, a) / |a|²`, counting each internal edge once.
///
/// This follows the internal-density formula literally, so a clique on `c`
/// vertices has internal density `(c choose 2) / c²` and never reaches `1`.
pub fn internal_density(g: &Graph, a: &VertexClass) -> Result<f64> {
    if a.is_empty() {
        return precondition("class must be non-empty");
    }
    let mask = membership(g, a)?;
    let twice = cross_weight(g, a.members(), &mask);
    let size = a.len() as f64;
    Ok(twice / 2.0 / (size * size))
}

/// Degrees inside the bipartite graph spanned by a pair of equal-sized classes.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteDegrees {
    /// Degree of each member of `a` towards `b`, in `a` order.
    pub left: Vec<f64>,
    /// Degree of each member of `b` towards `a`, in `b` order.
    pub right: Vec<f64>,
    /// `(1 / 2n) Σ deg` over both sides, `n = |a|`.
    pub average: f64,
}

pub fn bipartite_degrees(g: &Graph, a: &VertexClass, b: &VertexClass) -> Result<BipartiteDegrees> {
    if a.len() != b.len() {
        return precondition(format!("class sizes differ: {} vs {}", a.len(), b.len()));
    }
    let mask_b = check_disjoint(g, a, b)?;
    let mask_a = membership(g, a)?;
    let side = |members: &[usize], other: &[bool]| -> Vec<f64> {
        members
            .iter()
            .map(|&x| g.neighbors(x).iter().filter(|&&(y, _)| other[y]).map(|&(_, w)| w).sum())
            .collect()
    };
    let left = side(a.members(), &mask_b);
    let right = side(b.members(), &mask_a);
    let total: f64 = left.iter().sum::<f64>() + right.iter().sum::<f64>();
    let average = total / (2.0 * a.len() as f64);
    Ok(BipartiteDegrees { left, right, average })
}

/// `σ(y1, y2) = |N(y1) ∩ N(y2)| − d̄² / n`, neighborhoods restricted to `a`.
///
/// For weighted graphs the common-neighborhood size generalizes to
/// `Σ_{x ∈ a} w(x, y1) w(x, y2)`.
pub fn neighbourhood_deviation(g: &Graph, a: &VertexClass, b: &VertexClass, y1: usize, y2: usize) -> Result<f64> {
    if y1 == y2 {
        return precondition("y1 and y2 must be distinct");
    }
    if !b.contains(y1) || !b.contains(y2) {
        return precondition("y1 and y2 must belong to the second class");
    }
    let degrees = bipartite_degrees(g, a, b)?;
    let common: f64 = a.members().iter().map(|&x| g.weight(x, y1) * g.weight(x, y2)).sum();
    Ok(common - degrees.average * degrees.average / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(v: &[usize], n: usize) -> VertexClass {
        VertexClass::new(v.to_vec(), n).unwrap()
    }

    fn complete_bipartite(left: &[usize], right: &[usize], n: usize, w: f64) -> Graph {
        let edges = left.iter().flat_map(|&u| right.iter().map(move |&v| (u, v, w)));
        Graph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn builder_rejects_self_loops_and_bad_weights() {
        assert!(Graph::from_edges(3, [(1, 1, 1.0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 1, 1.5)]).is_err());
        assert!(Graph::from_edges(3, [(0, 5, 1.0)]).is_err());
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = Graph::from_edges(3, [(0, 1, 0.3), (1, 0, 0.7), (1, 2, 1.0)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.weight(0, 1), 0.7);
        assert_eq!(g.weight(1, 0), 0.7);
        assert!(g.is_weighted());
    }

    #[test]
    fn dense_and_sparse_views_agree() {
        let edges = [(0, 1, 1.0), (2, 3, 0.5), (1, 3, 0.25)];
        let dense = Graph::from_edges(5, edges).unwrap();
        let mut b = Graph::builder(5).dense_threshold(0);
        for &(u, v, w) in &edges {
            b.add_edge(u, v, w);
        }
        let sparse = b.build().unwrap();
        assert!(dense.is_dense() && !sparse.is_dense());
        for u in 0..5 {
            for v in 0..5 {
                assert_eq!(dense.weight(u, v), sparse.weight(u, v));
            }
        }
        let rows = [0, 2];
        let cols = [1, 3, 4];
        assert_eq!(dense.block(&rows, &cols), sparse.block(&rows, &cols));
    }

    #[test]
    fn edge_density_examples() {
        let n = 7;
        let a = class(&[0, 1, 2], n);
        let b = class(&[3, 4, 5, 6], n);
        assert_eq!(edge_density(&Graph::empty(n), &a, &b).unwrap(), 0.0);
        let full = complete_bipartite(a.members(), b.members(), n, 1.0);
        assert_eq!(edge_density(&full, &a, &b).unwrap(), 1.0);
        let six = Graph::from_unweighted_edges(n, [(0, 3), (0, 4), (1, 5), (1, 6), (2, 3), (2, 6)]).unwrap();
        assert_eq!(edge_density(&six, &a, &b).unwrap(), 0.5);
        assert_eq!(edge_density(&six, &b, &a).unwrap(), 0.5);
    }

    #[test]
    fn edge_density_rejects_overlap_and_empty() {
        let g = Graph::empty(4);
        assert!(edge_density(&g, &class(&[0, 1], 4), &class(&[1, 2], 4)).is_err());
        assert!(edge_density(&g, &class(&[], 4), &class(&[1, 2], 4)).is_err());
    }

    #[test]
    fn weighted_complete_pair_has_density_w() {
        let g = complete_bipartite(&[0, 1], &[2, 3, 4], 5, 0.35);
        assert!((edge_density(&g, &class(&[0, 1], 5), &class(&[2, 3, 4], 5)).unwrap() - 0.35).abs() < 1e-15);
    }

    #[test]
    fn internal_density_examples() {
        assert_eq!(internal_density(&Graph::empty(3), &class(&[0, 1, 2], 3)).unwrap(), 0.0);
        let one = Graph::from_unweighted_edges(2, [(0, 1)]).unwrap();
        assert_eq!(internal_density(&one, &class(&[0, 1], 2)).unwrap(), 0.25);
        let k4 = Graph::from_unweighted_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(internal_density(&k4, &class(&[0, 1, 2, 3], 4)).unwrap(), 0.375);
        assert!(internal_density(&k4, &class(&[], 4)).is_err());
    }

    #[test]
    fn bipartite_degree_examples() {
        let a = class(&[0, 1], 4);
        let b = class(&[2, 3], 4);
        let full = complete_bipartite(&[0, 1], &[2, 3], 4, 1.0);
        let d = bipartite_degrees(&full, &a, &b).unwrap();
        assert_eq!(d.average, 2.0);
        assert!(d.left.iter().chain(&d.right).all(|&x| x == 2.0));

        let d = bipartite_degrees(&Graph::empty(4), &a, &b).unwrap();
        assert_eq!(d.average, 0.0);

        let matching = Graph::from_unweighted_edges(4, [(0, 2), (1, 3)]).unwrap();
        let d = bipartite_degrees(&matching, &a, &b).unwrap();
        assert_eq!(d.average, 1.0);
        assert_eq!(d.left, vec![1.0, 1.0]);

        assert!(bipartite_degrees(&full, &class(&[0], 4), &b).is_err());
    }

    #[test]
    fn neighbourhood_deviation_examples() {
        let a = class(&[0, 1], 4);
        let b = class(&[2, 3], 4);
        assert_eq!(neighbourhood_deviation(&Graph::empty(4), &a, &b, 2, 3).unwrap(), 0.0);
        let full = complete_bipartite(&[0, 1], &[2, 3], 4, 1.0);
        assert_eq!(neighbourhood_deviation(&full, &a, &b, 2, 3).unwrap(), 0.0);
        // both members of b adjacent only to vertex 0: d̄ = 1, so 1 − 1/2
        let shared = Graph::from_unweighted_edges(4, [(0, 2), (0, 3)]).unwrap();
        assert_eq!(neighbourhood_deviation(&shared, &a, &b, 2, 3).unwrap(), 0.5);
        assert_eq!(neighbourhood_deviation(&shared, &a, &b, 3, 2).unwrap(), 0.5);
        assert!(neighbourhood_deviation(&shared, &a, &b, 0, 3).is_err());
    }

    #[test]
    fn components() {
        let g = Graph::from_unweighted_edges(6, [(0, 1), (2, 3), (3, 4)]).unwrap();
        assert_eq!(g.connected_components(), vec![0, 0, 1, 1, 1, 2]);
        assert_eq!(g.largest_component(), vec![2, 3, 4]);
        let sub = g.induced_subgraph(&[4, 3, 2]).unwrap();
        assert!(sub.has_edge(0, 1) && sub.has_edge(1, 2) && !sub.has_edge(0, 2));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_graph() -> impl Strategy<Value = Graph> {
            (4usize..14).prop_flat_map(|n| {
                proptest::collection::vec((0..n, 0..n, 0.05f64..=1.0), 0..40).prop_map(move |edges| {
                    Graph::from_edges(n, edges.into_iter().filter(|&(u, v, _)| u != v)).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn graph_invariants_hold(g in random_graph()) {
                for u in 0..g.n() {
                    prop_assert_eq!(g.weight(u, u), 0.0);
                    for v in 0..g.n() {
                        let w = g.weight(u, v);
                        prop_assert_eq!(w, g.weight(v, u));
                        prop_assert!((0.0..=1.0).contains(&w));
                    }
                }
            }

            #[test]
            fn densities_in_unit_interval_and_symmetric(g in random_graph(), split in 1usize..3) {
                let n = g.n();
                let a = VertexClass::new((0..split).collect(), n).unwrap();
                let b = VertexClass::new((split..n).collect(), n).unwrap();
                let ab = edge_density(&g, &a, &b).unwrap();
                let ba = edge_density(&g, &b, &a).unwrap();
                prop_assert!((0.0..=1.0).contains(&ab));
                prop_assert!((ab - ba).abs() < 1e-12);
                let inner = internal_density(&g, &b).unwrap();
                prop_assert!((0.0..=1.0).contains(&inner));
            }

            #[test]
            fn deviation_is_symmetric(g in random_graph()) {
                let n = g.n();
                let half = n / 2;
                let a = VertexClass::new((0..half).collect(), n).unwrap();
                let b = VertexClass::new((half..2 * half).collect(), n).unwrap();
                let (y1, y2) = (half, half + 1);
                let s12 = neighbourhood_deviation(&g, &a, &b, y1, y2).unwrap();
                let s21 = neighbourhood_deviation(&g, &a, &b, y2, y1).unwrap();
                prop_assert!((s12 - s21).abs() < 1e-12);
            }
        }
    }
}
