//! Reduced graphs, their blow-up, and l_p reconstruction error.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::regularity::{density_matrix, PairVerdicts, Partition};

/// Which pairs keep their density as superedge weight.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightRule {
    /// Weight `d` iff the pair is ε-regular and `d ≥ d′`.
    RegularAndDense,
    /// Weight `d` iff `d ≥ d′`; the regularity mask is kept for reference only.
    #[default]
    Dense,
}

/// Summary of a graph: one node per partition class, weighted by densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedGraph {
    /// Vertex count of the summarized graph.
    pub n: usize,
    pub epsilon: f64,
    pub d_prime: f64,
    pub class_sizes: Vec<usize>,
    /// Symmetric; the diagonal holds internal densities, which never become weights.
    pub densities: Vec<Vec<f64>>,
    pub regular_mask: Vec<Vec<bool>>,
    pub exceptional_count: usize,
    #[serde(default)]
    pub weight_rule: WeightRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_members: Option<Vec<Vec<usize>>>,
}

impl ReducedGraph {
    pub fn k(&self) -> usize {
        self.class_sizes.len()
    }

    /// Superedge weight `w(C_i, C_j)`; zero on the diagonal.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let d = self.densities[i][j];
        let admitted = match self.weight_rule {
            WeightRule::RegularAndDense => self.regular_mask[i][j],
            WeightRule::Dense => true,
        };
        if i != j && admitted && d >= self.d_prime {
            d
        } else {
            0.0
        }
    }

    /// The summary itself as a weighted graph on `k` vertices.
    pub fn to_graph(&self) -> Graph {
        let k = self.k();
        let edges = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).map(|(i, j)| (i, j, self.weight(i, j)));
        Graph::from_edges(k, edges.collect::<Vec<_>>()).expect("densities lie in [0, 1]")
    }

    /// Original vertex per blow-up vertex, when class members were kept.
    pub fn retained_vertices(&self) -> Option<Vec<usize>> {
        self.class_members.as_ref().map(|m| m.iter().flatten().copied().collect())
    }

    fn class_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.k() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &s in &self.class_sizes {
            acc += s;
            offsets.push(acc);
        }
        offsets
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        let square = |rows: usize, cols: &[usize]| rows == k && cols.iter().all(|&c| c == k);
        let dens_cols: Vec<usize> = self.densities.iter().map(Vec::len).collect();
        let mask_cols: Vec<usize> = self.regular_mask.iter().map(Vec::len).collect();
        if !square(self.densities.len(), &dens_cols) || !square(self.regular_mask.len(), &mask_cols) {
            return Err(Error::InvalidArgument(format!("summary matrices must be {k} x {k}")));
        }
        for i in 0..k {
            for j in 0..k {
                let d = self.densities[i][j];
                if !(0.0..=1.0).contains(&d) || d != self.densities[j][i] || self.regular_mask[i][j] != self.regular_mask[j][i] {
                    return Err(Error::InvalidArgument(format!("summary entry ({i}, {j}) is not a symmetric density")));
                }
            }
        }
        Ok(())
    }
}

/// Builds the reduced graph of `g` for partition `p`. Exceptional vertices
/// are left out and only counted.
pub fn build_reduced_graph(
    g: &Graph,
    p: &Partition,
    verdicts: &PairVerdicts,
    d_prime: f64,
    rule: WeightRule,
) -> Result<ReducedGraph> {
    let k = p.k();
    if verdicts.k() != k {
        return Err(Error::DimensionMismatch { left: verdicts.k(), right: k });
    }
    let densities = density_matrix(g, p);
    let regular_mask = (0..k).map(|i| (0..k).map(|j| i == j || verdicts.get(i, j).is_regular()).collect()).collect();
    Ok(ReducedGraph {
        n: g.n(),
        epsilon: p.epsilon,
        d_prime,
        class_sizes: p.classes.iter().map(|c| c.len()).collect(),
        densities,
        regular_mask,
        exceptional_count: p.exceptional.len(),
        weight_rule: rule,
        class_members: Some(p.classes.iter().map(|c| c.members().to_vec()).collect()),
    })
}

/// Replaces each summary node by its class and each superedge by a complete
/// bipartite block of constant weight. Blow-up vertices are numbered class by
/// class.
pub fn blow_up(r: &ReducedGraph) -> Graph {
    let offsets = r.class_offsets();
    let total = *offsets.last().unwrap_or(&0);
    let mut builder = Graph::builder(total);
    for i in 0..r.k() {
        for j in i + 1..r.k() {
            let w = r.weight(i, j);
            if w > 0.0 {
                for u in offsets[i]..offsets[i + 1] {
                    for v in offsets[j]..offsets[j + 1] {
                        builder.add_edge(u, v, w);
                    }
                }
            }
        }
    }
    builder.build().expect("blocks are within range")
}

/// Unweighted blow-up keeping each block edge with probability equal to its weight.
pub fn blow_up_sampled(r: &ReducedGraph, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offsets = r.class_offsets();
    let total = *offsets.last().unwrap_or(&0);
    let mut builder = Graph::builder(total);
    for i in 0..r.k() {
        for j in i + 1..r.k() {
            let w = r.weight(i, j);
            if w > 0.0 {
                for u in offsets[i]..offsets[i + 1] {
                    for v in offsets[j]..offsets[j + 1] {
                        if rng.gen_bool(w) {
                            builder.add_edge(u, v, 1.0);
                        }
                    }
                }
            }
        }
    }
    builder.build().expect("blocks are within range")
}

/// `(Σ_i Σ_j |A(i,j) − B(i,j)|^p)^{1/p}` over all ordered pairs.
pub fn reconstruction_error(a: &Graph, b: &Graph, p: f64) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { left: a.n(), right: b.n() });
    }
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("norm order {p} must be positive")));
    }
    let mut sum = 0.0;
    for u in 0..a.n() {
        let (x, y) = (a.neighbors(u), b.neighbors(u));
        let (mut i, mut j) = (0, 0);
        while i < x.len() || j < y.len() {
            let diff = match (x.get(i), y.get(j)) {
                (Some(&(va, wa)), Some(&(vb, wb))) => match va.cmp(&vb) {
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        wa - wb
                    }
                    Ordering::Less => {
                        i += 1;
                        wa
                    }
                    Ordering::Greater => {
                        j += 1;
                        wb
                    }
                },
                (Some(&(_, wa)), None) => {
                    i += 1;
                    wa
                }
                (None, Some(&(_, wb))) => {
                    j += 1;
                    wb
                }
                (None, None) => unreachable!(),
            };
            sum += diff.abs().powf(p);
        }
    }
    Ok(sum.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexClass;
    use crate::regularity::{PairStatus, PairVerdict};

    fn partition(sizes: &[usize]) -> Partition {
        let n: usize = sizes.iter().sum();
        let mut start = 0;
        let classes = sizes
            .iter()
            .map(|&s| {
                let c = VertexClass::new((start..start + s).collect(), n).unwrap();
                start += s;
                c
            })
            .collect();
        Partition { classes, exceptional: VertexClass::default(), epsilon: 0.05 }
    }

    fn irregular() -> PairVerdict {
        PairVerdict { status: PairStatus::IrregularByDegree, certificate: None }
    }

    fn complete_blocks(sizes: &[usize], pairs: &[(usize, usize)]) -> Graph {
        let mut offsets = vec![0];
        for s in sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        let mut edges = Vec::new();
        for &(i, j) in pairs {
            for u in offsets[i]..offsets[i + 1] {
                for v in offsets[j]..offsets[j + 1] {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_unweighted_edges(*offsets.last().unwrap(), edges).unwrap()
    }

    #[test]
    fn all_irregular_gives_zero_weights_under_strict_rule() {
        let g = complete_blocks(&[3, 3, 3], &[(0, 1), (1, 2), (0, 2)]);
        let v = PairVerdicts::from_ordered(3, vec![irregular(); 3]).unwrap();
        let r = build_reduced_graph(&g, &partition(&[3, 3, 3]), &v, 0.05, WeightRule::RegularAndDense).unwrap();
        assert!((0..3).all(|i| (0..3).all(|j| r.weight(i, j) == 0.0)));
        assert_eq!(blow_up(&r).edge_count(), 0);
        let r = build_reduced_graph(&g, &partition(&[3, 3, 3]), &v, 0.05, WeightRule::Dense).unwrap();
        assert_eq!(r.weight(0, 1), 1.0);
    }

    fn two_class_summary(density: f64, d_prime: f64) -> ReducedGraph {
        ReducedGraph {
            n: 4,
            epsilon: 0.05,
            d_prime,
            class_sizes: vec![2, 2],
            densities: vec![vec![0.0, density], vec![density, 0.0]],
            regular_mask: vec![vec![true; 2]; 2],
            exceptional_count: 0,
            weight_rule: WeightRule::RegularAndDense,
            class_members: None,
        }
    }

    #[test]
    fn density_floor() {
        assert_eq!(two_class_summary(0.7, 0.2).weight(0, 1), 0.7);
        assert_eq!(two_class_summary(0.1, 0.2).weight(0, 1), 0.0);
    }

    #[test]
    fn blow_up_examples() {
        let g = blow_up(&two_class_summary(0.5, 0.05));
        assert_eq!(g.n(), 4);
        for u in 0..4 {
            for v in 0..4 {
                let expected = if (u < 2) != (v < 2) { 0.5 } else { 0.0 };
                assert_eq!(g.weight(u, v), expected);
            }
        }
        assert_eq!(blow_up(&two_class_summary(0.0, 0.05)).edge_count(), 0);
        let single = ReducedGraph {
            class_sizes: vec![5],
            densities: vec![vec![0.3]],
            regular_mask: vec![vec![true]],
            ..two_class_summary(0.0, 0.05)
        };
        let g = blow_up(&single);
        assert_eq!((g.n(), g.edge_count()), (5, 0));
    }

    #[test]
    fn reconstruction_error_examples() {
        let one = Graph::from_unweighted_edges(2, [(0, 1)]).unwrap();
        let none = Graph::empty(2);
        assert_eq!(reconstruction_error(&one, &one, 2.0).unwrap(), 0.0);
        assert!((reconstruction_error(&one, &none, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(reconstruction_error(&one, &none, 1.0).unwrap(), 2.0);
        assert!(matches!(reconstruction_error(&one, &Graph::empty(3), 2.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn exact_block_structure_is_reproduced() {
        let sizes = [4, 4, 4, 4];
        let g = complete_blocks(&sizes, &[(0, 1), (2, 3), (0, 3)]);
        let p = partition(&sizes);
        let r = build_reduced_graph(&g, &p, &PairVerdicts::all_regular(4), 0.05, WeightRule::RegularAndDense).unwrap();
        assert_eq!(reconstruction_error(&blow_up(&r), &g, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn exceptional_vertices_are_dropped() {
        let g = complete_blocks(&[2, 2, 1], &[(0, 1), (1, 2)]);
        let mut p = partition(&[2, 2]);
        p.exceptional = VertexClass::new(vec![4], 5).unwrap();
        let r = build_reduced_graph(&g, &p, &PairVerdicts::all_regular(2), 0.05, WeightRule::Dense).unwrap();
        assert_eq!(r.exceptional_count, 1);
        assert_eq!(blow_up(&r).n(), 4);
        assert_eq!(r.retained_vertices().unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn sampled_blow_up_is_seeded() {
        let r = two_class_summary(0.5, 0.05);
        let a = blow_up_sampled(&r, 9);
        let b = blow_up_sampled(&r, 9);
        assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
        assert!(a.edges().all(|(u, v, w)| w == 1.0 && (u < 2) != (v < 2)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        fn weighted_graph(n: usize) -> impl Strategy<Value = Graph> {
            proptest::collection::vec((0..n, 0..n, 0.0f64..=1.0), 0..30)
                .prop_map(move |e| Graph::from_edges(n, e.into_iter().filter(|&(u, v, _)| u != v)).unwrap())
        }

        proptest! {
            #[test]
            fn error_is_symmetric_and_separating(a in weighted_graph(7), b in weighted_graph(7), p in 1.0f64..3.0) {
                let ab = reconstruction_error(&a, &b, p).unwrap();
                let ba = reconstruction_error(&b, &a, p).unwrap();
                prop_assert!((ab - ba).abs() < 1e-12);
                let same = (0..7).all(|u| (0..7).all(|v| a.weight(u, v) == b.weight(u, v)));
                prop_assert_eq!(ab == 0.0, same);
                let brute: f64 = (0..7).flat_map(|u| (0..7).map(move |v| (u, v)))
                    .map(|(u, v)| (a.weight(u, v) - b.weight(u, v)).abs().powf(p)).sum::<f64>().powf(1.0 / p);
                prop_assert!((ab - brute).abs() < 1e-9);
            }

            #[test]
            fn blow_up_is_a_valid_graph(sizes in proptest::collection::vec(1usize..4, 1..5), seed in 0u64..100) {
                let k = sizes.len();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut densities = vec![vec![0.0; k]; k];
                for i in 0..k {
                    for j in i..k {
                        let d: f64 = rng.gen();
                        densities[i][j] = d;
                        densities[j][i] = d;
                    }
                }
                let r = ReducedGraph {
                    n: sizes.iter().sum(), epsilon: 0.05, d_prime: 0.05, class_sizes: sizes.clone(), densities,
                    regular_mask: vec![vec![true; k]; k], exceptional_count: 0, weight_rule: WeightRule::Dense, class_members: None,
                };
                let g = blow_up(&r);
                prop_assert_eq!(g.n(), sizes.iter().sum::<usize>());
                for u in 0..g.n() {
                    prop_assert_eq!(g.weight(u, u), 0.0);
                    for v in 0..g.n() {
                        prop_assert_eq!(g.weight(u, v), g.weight(v, u));
                    }
                }
            }
        }
    }
}
