use std::collections::HashSet;

use crate::error::{precondition, Error, Result};

/// Average precision at `k`: `(1/|relevant|) Σ_{j ≤ k} precision(j) · rel(j)`.
pub fn ap_at_k(ranking: &[String], relevant: &HashSet<String>, k: usize) -> Result<f64> {
    if relevant.is_empty() {
        return Err(Error::InvalidArgument("relevant set is empty".into()));
    }
    if k > ranking.len() {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds ranking length {}", ranking.len())));
    }
    let mut hits = 0usize;
    let mut total = 0.0;
    for (j, id) in ranking[..k].iter().enumerate() {
        if relevant.contains(id) {
            hits += 1;
            total += hits as f64 / (j + 1) as f64;
        }
    }
    Ok(total / relevant.len() as f64)
}

/// Mean of [`ap_at_k`] over queries given as `(ranking, relevant)` pairs.
pub fn map_at_k(queries: &[(Vec<String>, HashSet<String>)], k: usize) -> Result<f64> {
    if queries.is_empty() {
        return precondition("no queries");
    }
    let mut sum = 0.0;
    for (ranking, relevant) in queries {
        sum += ap_at_k(ranking, relevant, k)?;
    }
    Ok(sum / queries.len() as f64)
}
