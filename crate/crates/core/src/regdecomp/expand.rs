use crate::graph::Graph;

/// Labels after one round of neighbor propagation, plus how many vertices
/// gained a label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub labels: Vec<Option<usize>>,
    pub added: usize,
}

/// Every unlabeled neighbor of a labeled vertex takes that vertex's group.
/// A vertex adjacent to several groups takes the lowest; existing labels are
/// never changed and newly labeled vertices do not propagate further.
pub fn expand_groups_by_neighbors(g: &Graph, labels: &[Option<usize>]) -> Expansion {
    let mut out = labels.to_vec();
    let mut added = 0;
    for v in 0..g.n() {
        if labels[v].is_some() {
            continue;
        }
        let group = g.neighbors(v).iter().filter_map(|&(u, _)| labels[u]).min();
        if group.is_some() {
            out[v] = group;
            added += 1;
        }
    }
    Expansion { labels: out, added }
}

/// Spreads fitted target labels over `g`; `targets[j]` carries `groups[j]`.
pub fn expand_from_targets(g: &Graph, targets: &[usize], groups: &[usize]) -> Expansion {
    let mut labels = vec![None; g.n()];
    for (&t, &z) in targets.iter().zip(groups) {
        labels[t] = Some(z);
    }
    expand_groups_by_neighbors(g, &labels)
}
