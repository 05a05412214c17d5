//! Approximate ε-regularity: pair tests with certificates, partition
//! measures, refinement, and the summarization loop.

mod refine;
mod summarize;

pub use refine::{refine_partition, unzip, RefineEvent, Refinement};
pub use summarize::{summarize, IterationRecord, SummarizationConfig, Summarized};

use faer::Mat;
use rayon::prelude::*;

use crate::error::{precondition, Error, Result};
use crate::graph::{bipartite_degrees, cross_weight, edge_density, Graph, VertexClass};

/// Equitable partition `C_1..C_k` plus the exceptional set `C_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub classes: Vec<VertexClass>,
    pub exceptional: VertexClass,
    pub epsilon: f64,
}

impl Partition {
    /// Checks disjointness, coverage of `[0, n)` and equal class sizes.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        let all = self.classes.iter().chain(std::iter::once(&self.exceptional));
        for class in all {
            for &v in class.members() {
                if v >= n {
                    return precondition(format!("vertex {v} outside 0..{n}"));
                }
                if std::mem::replace(&mut seen[v], true) {
                    return precondition(format!("vertex {v} assigned twice"));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return precondition(format!("vertex {missing} not covered"));
        }
        if let Some(first) = self.classes.first() {
            if self.classes.iter().any(|c| c.len() != first.len()) {
                return precondition("classes differ in size");
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn class_size(&self) -> usize {
        self.classes.first().map_or(0, VertexClass::len)
    }

    /// Class index per vertex, `None` for the exceptional set.
    pub fn labels(&self, n: usize) -> Vec<Option<usize>> {
        let mut labels = vec![None; n];
        for (i, c) in self.classes.iter().enumerate() {
            for &v in c.members() {
                labels[v] = Some(i);
            }
        }
        labels
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PairStatus {
    Regular,
    IrregularByDegree,
    IrregularByDensity,
}

/// Witness of irregularity: `a ⊂ cr`, `b ⊂ cs` and their complements.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub a: VertexClass,
    pub b: VertexClass,
    pub a_complement: VertexClass,
    pub b_complement: VertexClass,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairVerdict {
    pub status: PairStatus,
    pub certificate: Option<Certificate>,
}

impl PairVerdict {
    pub fn regular() -> Self {
        PairVerdict { status: PairStatus::Regular, certificate: None }
    }

    pub fn is_regular(&self) -> bool {
        self.status == PairStatus::Regular
    }

    fn irregular(status: PairStatus, cr: &VertexClass, cs: &VertexClass, a: Vec<usize>, b: Vec<usize>) -> Self {
        let complement = |whole: &VertexClass, part: &[usize]| {
            let mut inside = part.to_vec();
            inside.sort_unstable();
            let rest = whole.members().iter().copied().filter(|v| inside.binary_search(v).is_err()).collect();
            VertexClass::from_vec_unchecked(rest)
        };
        let certificate = Certificate {
            a_complement: complement(cr, &a),
            b_complement: complement(cs, &b),
            a: VertexClass::from_vec_unchecked(a),
            b: VertexClass::from_vec_unchecked(b),
        };
        PairVerdict { status, certificate: Some(certificate) }
    }
}

/// Verdicts for every unordered class pair `i < j`, with `cr = C_i`, `cs = C_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairVerdicts {
    k: usize,
    verdicts: Vec<PairVerdict>,
}

impl PairVerdicts {
    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        assert!(j < self.k && i != j, "pair ({i}, {j}) outside 0..{}", self.k);
        i * self.k - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Builds verdicts from pairs listed in `(0,1), (0,2), …, (k-2,k-1)` order.
    pub fn from_ordered(k: usize, verdicts: Vec<PairVerdict>) -> Result<Self> {
        if verdicts.len() != k * k.saturating_sub(1) / 2 {
            return Err(Error::DimensionMismatch { left: verdicts.len(), right: k * k.saturating_sub(1) / 2 });
        }
        Ok(PairVerdicts { k, verdicts })
    }

    pub fn all_regular(k: usize) -> Self {
        PairVerdicts { k, verdicts: vec![PairVerdict::regular(); k * k.saturating_sub(1) / 2] }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> &PairVerdict {
        &self.verdicts[self.slot(i, j)]
    }

    /// The part of the certificate of pair `{i, j}` lying in `C_i`, and its complement.
    pub fn certificate_side(&self, i: usize, j: usize) -> Option<(&VertexClass, &VertexClass)> {
        let cert = self.get(i, j).certificate.as_ref()?;
        Some(if i < j { (&cert.a, &cert.a_complement) } else { (&cert.b, &cert.b_complement) })
    }

    pub fn irregular_count(&self) -> usize {
        self.verdicts.iter().filter(|v| !v.is_regular()).count()
    }
}

fn check_eps_strict(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0 / 16.0) {
        return Err(Error::Config(format!("epsilon {eps} outside (0, 1/16)")));
    }
    Ok(())
}

fn check_pair_shape(g: &Graph, cr: &VertexClass, cs: &VertexClass) -> Result<()> {
    if cr.len() != cs.len() || cr.is_empty() {
        return precondition(format!("classes must be non-empty and equal in size, got {} and {}", cr.len(), cs.len()));
    }
    edge_density(g, cr, cs).map(|_| ())
}

/// Tests whether `(cr, cs)` is ε-regular using the degree conditions, then
/// the greedy certificate search.
///
/// 1. average degree below `ε³n`: regular;
/// 2. more than `ε⁴n/8` vertices of `cs` deviate from the average degree by
///    at least `ε⁴n`: irregular, with `A′ = cr` and `B′` the deviating
///    vertices on the majority side;
/// 3. otherwise [`find_certificates_greedy`] decides.
pub fn check_pair_regularity(g: &Graph, cr: &VertexClass, cs: &VertexClass, eps: f64) -> Result<PairVerdict> {
    check_eps_strict(eps)?;
    check_pair_shape(g, cr, cs)?;
    let n = cr.len() as f64;
    let degrees = bipartite_degrees(g, cr, cs)?;
    if degrees.average < eps.powi(3) * n {
        return Ok(PairVerdict::regular());
    }
    let threshold = eps.powi(4) * n;
    let mut above = Vec::new();
    let mut below = Vec::new();
    for (&v, &deg) in cs.members().iter().zip(&degrees.right) {
        if deg - degrees.average >= threshold {
            above.push(v);
        } else if degrees.average - deg >= threshold {
            below.push(v);
        }
    }
    if (above.len() + below.len()) as f64 > threshold / 8.0 {
        let b = if above.len() >= below.len() { above } else { below };
        return Ok(PairVerdict::irregular(PairStatus::IrregularByDegree, cr, cs, cr.members().to_vec(), b));
    }
    greedy_search(g, cr, cs, eps, &degrees.right, degrees.average)
}

/// Greedy search for density certificates.
///
/// Candidates `y0 ∈ cs` are visited starting with the `⌈ε⁴n/4⌉` highest
/// degrees, then by decreasing deviation from the average degree. Each
/// candidate proposes `B′ = {y : σ(y0, y) ≥ 2ε⁴n}` and `A′ = N(y0) ∩ cr`.
/// A proposal is accepted when both sets exceed `ε|C|` and
/// `|d(A′, B′) − d(cr, cs)| ≥ ε`, which makes it a genuine witness of
/// ε-irregularity. Returns `Regular` when no candidate yields a witness.
///
/// Accepts any `ε ∈ (0, 1)` so it can be used outside the strict pair test.
pub fn find_certificates_greedy(g: &Graph, cr: &VertexClass, cs: &VertexClass, eps: f64) -> Result<PairVerdict> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Config(format!("epsilon {eps} outside (0, 1)")));
    }
    check_pair_shape(g, cr, cs)?;
    let degrees = bipartite_degrees(g, cr, cs)?;
    greedy_search(g, cr, cs, eps, &degrees.right, degrees.average)
}

fn greedy_search(
    g: &Graph,
    cr: &VertexClass,
    cs: &VertexClass,
    eps: f64,
    degree: &[f64],
    average: f64,
) -> Result<PairVerdict> {
    let size = cr.len();
    let n = size as f64;
    let e4n = eps.powi(4) * n;
    let h = g.block(cr.members(), cs.members());
    let mut mask_cs = vec![false; g.n()];
    for &v in cs.members() {
        mask_cs[v] = true;
    }
    let pair_density = cross_weight(g, cr.members(), &mask_cs) / (n * n);
    let gram = h.transpose() * &h;
    // co-degree of y towards N(y0): needed separately only when weights differ from 1
    let towards_neighbors = if g.is_weighted() {
        let support = Mat::<f64>::from_fn(size, size, |i, j| if h[(i, j)] > 0.0 { 1.0 } else { 0.0 });
        Some(support.transpose() * &h)
    } else {
        None
    };

    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&x, &y| degree[y].total_cmp(&degree[x]).then(x.cmp(&y)));
    let head = ((e4n / 4.0).ceil() as usize).clamp(1, size);
    let mut rest = order.split_off(head);
    rest.sort_by(|&x, &y| (degree[y] - average).abs().total_cmp(&(degree[x] - average).abs()).then(x.cmp(&y)));
    order.extend(rest);

    let shift = average * average / n;
    let min_size = eps * n;
    for &y0 in &order {
        let b_local: Vec<usize> = (0..size).filter(|&y| gram[(y0, y)] - shift >= 2.0 * e4n).collect();
        let a_local: Vec<usize> = (0..size).filter(|&a| h[(a, y0)] > 0.0).collect();
        if (b_local.len() as f64) <= min_size || (a_local.len() as f64) <= min_size {
            continue;
        }
        let cross: f64 = match &towards_neighbors {
            Some(m) => b_local.iter().map(|&y| m[(y0, y)]).sum(),
            None => b_local.iter().map(|&y| gram[(y0, y)]).sum(),
        };
        let density = cross / (a_local.len() as f64 * b_local.len() as f64);
        if (density - pair_density).abs() >= eps {
            let a = a_local.iter().map(|&i| cr.members()[i]).collect();
            let b = b_local.iter().map(|&i| cs.members()[i]).collect();
            return Ok(PairVerdict::irregular(PairStatus::IrregularByDensity, cr, cs, a, b));
        }
    }
    Ok(PairVerdict::regular())
}

/// Runs [`check_pair_regularity`] on every class pair. Pairs are evaluated in
/// parallel and collected in canonical order.
pub fn check_all_pairs(g: &Graph, p: &Partition) -> Result<PairVerdicts> {
    let k = p.k();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let verdicts = pairs
        .par_iter()
        .map(|&(i, j)| check_pair_regularity(g, &p.classes[i], &p.classes[j], p.epsilon))
        .collect::<Result<Vec<_>>>()?;
    PairVerdicts::from_ordered(k, verdicts)
}

/// Pairwise class densities, `k x k`, diagonal holding internal densities.
pub fn density_matrix(g: &Graph, p: &Partition) -> Vec<Vec<f64>> {
    let k = p.k();
    let labels = p.labels(g.n());
    let mut weight = vec![vec![0.0; k]; k];
    for (u, v, w) in g.edges() {
        if let (Some(a), Some(b)) = (labels[u], labels[v]) {
            weight[a][b] += w;
            if a != b {
                weight[b][a] += w;
            }
        }
    }
    let sizes: Vec<f64> = p.classes.iter().map(|c| c.len() as f64).collect();
    for a in 0..k {
        for b in 0..k {
            let denom = sizes[a] * sizes[b];
            weight[a][b] = if denom > 0.0 { weight[a][b] / denom } else { 0.0 };
        }
    }
    weight
}

/// `ind(P) = (1/k²) Σ_{s<t} d(C_s, C_t)²`, always within `[0, 1/2]`.
pub fn index_of_partition(g: &Graph, p: &Partition) -> f64 {
    let k = p.k();
    if k == 0 {
        return 0.0;
    }
    let d = density_matrix(g, p);
    let mut sum = 0.0;
    for s in 0..k {
        for t in s + 1..k {
            sum += d[s][t] * d[s][t];
        }
    }
    sum / (k * k) as f64
}

/// `1 − k/n`.
pub fn compression_rate(k: usize, n: usize) -> Result<f64> {
    if k == 0 || n == 0 {
        return precondition("compression rate needs k ≥ 1 and n ≥ 1");
    }
    Ok(1.0 - k as f64 / n as f64)
}
