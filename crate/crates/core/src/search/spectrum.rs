use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::graph::Graph;

/// Laplacian eigenvalues in ascending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Sorts the values; callers supply eigenvalues of a Laplacian.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Spectrum(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Eigenvalues of `L = D − W`, ascending, with round-off below zero clamped.
pub fn laplacian_spectrum(g: &Graph) -> Result<Spectrum> {
    let n = g.n();
    if n == 0 {
        return precondition("spectrum of an empty graph");
    }
    let mut l = Mat::<f64>::zeros(n, n);
    for u in 0..n {
        for &(v, w) in g.neighbors(u) {
            l[(u, v)] = -w;
        }
        l[(u, u)] = g.weighted_degree(u);
    }
    let values = l
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigensolver failed: {e:?}")))?;
    Ok(Spectrum::from_values(values.into_iter().map(|x| x.max(0.0)).collect()))
}

/// Spectral distance with head/tail alignment.
///
/// The shorter spectrum (length `n₁`) is compared against the longer one
/// (length `n₂`): the first `l` eigenvalues are matched index by index, the
/// remaining ones against the top of the longer spectrum, and the sum of
/// absolute gaps is divided by `n₁`. `l` defaults to `⌊n₁/2⌋`.
pub fn spectral_distance(s1: &Spectrum, s2: &Spectrum, l: Option<usize>) -> Result<f64> {
    let (short, long) = if s1.len() <= s2.len() { (s1.values(), s2.values()) } else { (s2.values(), s1.values()) };
    let n1 = short.len();
    if n1 == 0 {
        return precondition("spectral distance of an empty spectrum");
    }
    let l = l.unwrap_or(n1 / 2);
    if l > n1 {
        return Err(Error::InvalidArgument(format!("split index {l} exceeds {n1}")));
    }
    let offset = long.len() - n1;
    let head: f64 = (0..l).map(|i| (long[i] - short[i]).abs()).sum();
    let tail: f64 = (l..n1).map(|i| (long[i + offset] - short[i]).abs()).sum();
    Ok((head + tail) / n1 as f64)
}
