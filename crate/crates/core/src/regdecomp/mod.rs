//! Regular decomposition of shortest-path distance matrices.
//!
//! Targets are grouped so that distances from every reference vertex to the
//! members of a group look like draws from one Poisson law. Fitting
//! alternates group means and per-target reassignment.

mod distance;
mod expand;
mod fit;
mod planted;

pub use distance::{bfs_distances, distance_matrix, path_cover, sample_references, DistanceMatrix, ReferenceScheme};
pub use expand::{expand_from_targets, expand_groups_by_neighbors, Expansion};
pub use fit::{
    classify_distances, classify_out_of_sample, estimate_k, knee_point, lambda_hat, node_cost, regular_decomposition,
    total_cost, BlockDistanceModel, Decomposition, FitConfig, KneeEstimate, PartitionMatrix, RestartTrace,
};
pub use planted::expected_planted_distances;

/// Fraction of targets whose label disagrees with `truth` under the best
/// relabeling. Exhaustive over permutations for `k ≤ 8`, greedy by overlap
/// beyond that.
pub fn misclassification(labels: &[usize], truth: &[usize], k: usize) -> f64 {
    assert_eq!(labels.len(), truth.len(), "label vectors differ in length");
    if labels.is_empty() {
        return 0.0;
    }
    let kt = truth.iter().copied().max().map_or(0, |m| m + 1).max(k);
    let mut overlap = vec![vec![0usize; kt]; kt];
    for (&l, &t) in labels.iter().zip(truth) {
        overlap[l][t] += 1;
    }
    let matched = if kt <= 8 {
        let mut best = 0;
        let mut perm: Vec<usize> = (0..kt).collect();
        permutations(&mut perm, 0, &mut |p| {
            let score = (0..kt).map(|l| overlap[l][p[l]]).sum();
            best = best.max(score);
        });
        best
    } else {
        let mut cells: Vec<(usize, usize, usize)> =
            (0..kt).flat_map(|l| (0..kt).map(move |t| (l, t))).map(|(l, t)| (overlap[l][t], l, t)).collect();
        cells.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let (mut used_l, mut used_t) = (vec![false; kt], vec![false; kt]);
        let mut total = 0;
        for (count, l, t) in cells {
            if !used_l[l] && !used_t[t] {
                used_l[l] = true;
                used_t[t] = true;
                total += count;
            }
        }
        total
    };
    1.0 - matched as f64 / labels.len() as f64
}

fn permutations(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permutations(items, start + 1, visit);
        items.swap(start, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn misclassification_uses_best_matching() {
        assert_eq!(misclassification(&[1, 1, 0, 0], &[0, 0, 1, 1], 2), 0.0);
        assert_eq!(misclassification(&[0, 1, 0, 0], &[0, 0, 1, 1], 2), 0.25);
        assert_eq!(misclassification(&[0, 1, 0, 1], &[0, 0, 1, 1], 2), 0.5);
        assert_eq!(misclassification(&[0, 0, 0, 1], &[0, 0, 1, 1], 2), 0.25);
        assert_eq!(misclassification(&[2, 0, 1], &[0, 1, 2], 3), 0.0);
        let labels: Vec<usize> = (0..40).map(|i| (i / 4 + 3) % 10).collect();
        let truth: Vec<usize> = (0..40).map(|i| i / 4).collect();
        assert_eq!(misclassification(&labels, &truth, 10), 0.0);
    }
}
