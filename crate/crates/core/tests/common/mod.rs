//! Independent oracles shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regpart::Graph;

type Q = Ratio<i128>;

/// Coefficients, lowest degree first, without trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<Q>);

impl Poly {
    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(|c| *c == Q::from_integer(0)) {
            self.0.pop();
        }
        self
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn monic(self) -> Self {
        let lead = *self.0.last().expect("nonzero polynomial");
        Poly(self.0.into_iter().map(|c| c / lead).collect())
    }

    fn derivative(&self) -> Self {
        Poly(self.0.iter().enumerate().skip(1).map(|(i, &c)| c * Q::from_integer(i as i128)).collect()).trim()
    }

    fn sub(&self, other: &Poly) -> Poly {
        let len = self.0.len().max(other.0.len());
        let zero = Q::from_integer(0);
        Poly((0..len).map(|i| *self.0.get(i).unwrap_or(&zero) - *other.0.get(i).unwrap_or(&zero)).collect()).trim()
    }

    /// Quotient and remainder.
    fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let mut rem = self.0.clone();
        let dd = d.degree();
        let lead = *d.0.last().expect("division by zero polynomial");
        if self.0.len() < d.0.len() {
            return (Poly(Vec::new()), self.clone());
        }
        let mut quot = vec![Q::from_integer(0); self.0.len() - d.0.len() + 1];
        for i in (0..quot.len()).rev() {
            let c = rem[i + dd] / lead;
            quot[i] = c;
            for (j, &dc) in d.0.iter().enumerate() {
                rem[i + j] -= c * dc;
            }
        }
        rem.truncate(dd);
        (Poly(quot).trim(), Poly(rem).trim())
    }

    fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + (*c.numer() as f64 / *c.denom() as f64))
    }
}

/// Characteristic polynomial `det(xI − A)` by Faddeev–LeVerrier in exact arithmetic.
pub fn characteristic_polynomial(a: &[Vec<i64>]) -> Poly {
    let n = a.len();
    let a: Vec<Vec<Q>> = a.iter().map(|r| r.iter().map(|&x| Q::from_integer(x as i128)).collect()).collect();
    let mut coeffs = vec![Q::from_integer(0); n + 1];
    coeffs[n] = Q::from_integer(1);
    let mut m = vec![vec![Q::from_integer(0); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![Q::from_integer(0); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Q::from_integer(0);
                for t in 0..n {
                    s += a[i][t] * m[t][j];
                }
                next[i][j] = s;
            }
            next[i][i] += coeffs[n - k + 1];
        }
        m = next;
        let mut trace = Q::from_integer(0);
        for i in 0..n {
            for t in 0..n {
                trace += a[i][t] * m[t][i];
            }
        }
        coeffs[n - k] = -trace / Q::from_integer(k as i128);
    }
    Poly(coeffs).trim()
}

/// Yun's square-free factorization: `(factor, multiplicity)` pairs.
pub fn squarefree_factors(p: &Poly) -> Vec<(Poly, usize)> {
    let p = p.clone().monic();
    let dp = p.derivative();
    if dp.is_zero() {
        return Vec::new();
    }
    let a0 = Poly::gcd(&p, &dp);
    let mut b = p.div_rem(&a0).0;
    let c = dp.div_rem(&a0).0;
    let mut d = c.sub(&b.derivative());
    let mut out = Vec::new();
    let mut i = 1;
    while b.degree() > 0 {
        let a = if d.is_zero() { b.clone().monic() } else { Poly::gcd(&b, &d) };
        let nb = b.div_rem(&a).0;
        let nc = if d.is_zero() { Poly(Vec::new()) } else { d.div_rem(&a).0 };
        if a.degree() > 0 {
            out.push((a, i));
        }
        d = nc.sub(&nb.derivative());
        b = nb;
        i += 1;
    }
    out
}

/// Roots of a square-free polynomial whose roots are all real, ascending.
/// Roots of the derivative separate them, one per interval.
pub fn real_roots(p: &Poly) -> Vec<f64> {
    let deg = p.degree();
    if deg == 0 {
        return Vec::new();
    }
    let lead = p.0[deg];
    let bound = 1.0
        + p.0[..deg]
            .iter()
            .map(|c| *c / lead)
            .map(|c| (*c.numer() as f64 / *c.denom() as f64).abs())
            .fold(0.0, f64::max);
    let mut cuts = vec![-bound];
    cuts.extend(real_roots(&p.derivative()));
    cuts.push(bound);
    cuts.windows(2)
        .map(|w| {
            let (mut lo, mut hi) = (w[0], w[1]);
            let f_lo = p.eval(lo);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let f_mid = p.eval(mid);
                if f_mid == 0.0 {
                    return mid;
                }
                if (f_mid > 0.0) == (f_lo > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Eigenvalues of an integer symmetric matrix with multiplicity, ascending.
pub fn symmetric_eigenvalues(a: &[Vec<i64>]) -> Vec<f64> {
    let p = characteristic_polynomial(a);
    let mut values: Vec<f64> = squarefree_factors(&p)
        .iter()
        .flat_map(|(f, mult)| real_roots(f).into_iter().flat_map(move |r| std::iter::repeat(r).take(*mult)))
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Integer Laplacian of an unweighted graph given as an edge mask over `u < v` pairs.
pub fn laplacian_from_mask(n: usize, mask: u32) -> Vec<Vec<i64>> {
    let mut l = vec![vec![0i64; n]; n];
    let mut bit = 0;
    for u in 0..n {
        for v in u + 1..n {
            if mask >> bit & 1 == 1 {
                l[u][v] = -1;
                l[v][u] = -1;
                l[u][u] += 1;
                l[v][v] += 1;
            }
            bit += 1;
        }
    }
    l
}

pub fn graph_from_mask(n: usize, mask: u32) -> Graph {
    let mut edges = Vec::new();
    let mut bit = 0;
    for u in 0..n {
        for v in u + 1..n {
            if mask >> bit & 1 == 1 {
                edges.push((u, v));
            }
            bit += 1;
        }
    }
    Graph::from_unweighted_edges(n, edges).unwrap()
}

/// Spectral distance written out index by index with 1-based eigenvalue
/// positions; `k` is the length of the shorter spectrum.
pub fn brute_spectral_distance(s1: &[f64], s2: &[f64], l: usize) -> f64 {
    let (lam1, lam2) = if s1.len() <= s2.len() { (s1, s2) } else { (s2, s1) };
    let (n1, n2) = (lam1.len(), lam2.len());
    let k = n1;
    let at = |v: &[f64], i: usize| v[i - 1];
    let mut sum = 0.0;
    for i in 1..=l {
        sum += (at(lam2, i) - at(lam1, i)).abs();
    }
    for i in l + 1..=n1 {
        sum += (at(lam2, i + n2 - k) - at(lam1, i)).abs();
    }
    sum / k as f64
}

/// Preferential attachment: each new vertex links to `m` distinct earlier
/// vertices drawn proportionally to degree, starting from a clique on `m + 1`.
pub fn preferential_attachment(n: usize, m: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut ends = Vec::new();
    for u in 0..=m {
        for v in u + 1..=m {
            edges.push((u, v));
            ends.extend([u, v]);
        }
    }
    for v in m + 1..n {
        let mut chosen: Vec<usize> = Vec::with_capacity(m);
        while chosen.len() < m {
            let u = ends[rng.gen_range(0..ends.len())];
            if !chosen.contains(&u) {
                chosen.push(u);
            }
        }
        for &u in &chosen {
            edges.push((u, v));
            ends.extend([u, v]);
        }
    }
    Graph::from_unweighted_edges(n, edges).unwrap()
}
