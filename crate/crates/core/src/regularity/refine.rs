use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{density_matrix, Partition, PairVerdicts, SummarizationConfig};
use crate::error::{Error, Result};
use crate::graph::{internal_density, Graph, VertexClass};

/// What the refinement did with one input class.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum RefineEvent {
    /// Regular with every other class, split by internal degree.
    Unzip { class: usize },
    /// Irregular, but every irregular partner was already paired up.
    UnzipWithoutPartner { class: usize },
    /// Split using the certificate of the pair `{class, partner}`.
    Sparsify { class: usize, partner: usize },
    Densify { class: usize, partner: usize },
    /// Exceptional vertices handed back to the classes.
    Redistribute { moved: usize },
}

#[derive(Clone, Debug)]
pub struct Refinement {
    pub partition: Partition,
    pub events: Vec<RefineEvent>,
}

/// Sorts `members` by internal degree, highest first and ties by lower
/// vertex index, then deals positions alternately into two halves.
pub fn unzip(g: &Graph, members: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let inside = mask_of(g.n(), members);
    let degrees: Vec<f64> = members
        .iter()
        .map(|&v| g.neighbors(v).iter().filter(|&&(u, _)| inside[u]).map(|&(_, w)| w).sum())
        .collect();
    unzip_by_degree(members, &degrees)
}

pub(crate) fn unzip_by_degree(members: &[usize], degrees: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut sorted: Vec<(f64, usize)> = degrees.iter().copied().zip(members.iter().copied()).collect();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut first = Vec::with_capacity(sorted.len().div_ceil(2));
    let mut second = Vec::with_capacity(sorted.len() / 2);
    for (pos, (_, v)) in sorted.into_iter().enumerate() {
        if pos % 2 == 0 {
            first.push(v);
        } else {
            second.push(v);
        }
    }
    (first, second)
}

fn mask_of(n: usize, members: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &v in members {
        mask[v] = true;
    }
    mask
}

/// Halves of size `target` for one class plus vertices that did not fit.
struct Split {
    halves: [Vec<usize>; 2],
    spill: Vec<usize>,
}

fn unzip_class(g: &Graph, members: &[usize], target: usize) -> Split {
    let (mut a, mut b) = unzip(g, members);
    let mut spill = a.split_off(target.min(a.len()));
    spill.extend(b.split_off(target.min(b.len())));
    Split { halves: [a, b], spill }
}

/// Splits a class around its certificate. The certificate is divided in two
/// (randomly when sparse, by unzipping when dense), each half is capped at
/// `target`, then both are filled alternately from the complement and the
/// overflow. Sparse certificates take the candidates with the fewest
/// connections to the half being filled, dense ones the most.
fn certificate_split(
    g: &Graph,
    certificate: &[usize],
    complement: &[usize],
    target: usize,
    dense: bool,
    rng: &mut ChaCha8Rng,
) -> Split {
    let (mut first, mut second) = if dense {
        unzip(g, certificate)
    } else {
        let mut shuffled = certificate.to_vec();
        shuffled.shuffle(rng);
        let second = shuffled.split_off(shuffled.len().div_ceil(2));
        (shuffled, second)
    };
    let mut pool: Vec<usize> = complement.to_vec();
    pool.extend(first.split_off(target.min(first.len())));
    pool.extend(second.split_off(target.min(second.len())));
    pool.sort_unstable();

    let n = g.n();
    let mut position = vec![usize::MAX; n];
    for (i, &v) in pool.iter().enumerate() {
        position[v] = i;
    }
    let mut taken = vec![false; pool.len()];
    // connection weight from each pool vertex to each half
    let mut links = [vec![0.0f64; pool.len()], vec![0.0f64; pool.len()]];
    let mut halves = [first, second];
    for (side, half) in halves.iter().enumerate() {
        for &v in half {
            for &(u, w) in g.neighbors(v) {
                if position[u] != usize::MAX {
                    links[side][position[u]] += w;
                }
            }
        }
    }
    let mut side = 0;
    while halves.iter().any(|h| h.len() < target) {
        if halves[side].len() >= target {
            side = 1 - side;
            continue;
        }
        let best = (0..pool.len()).filter(|&i| !taken[i]).reduce(|best, i| {
            let better = if dense { links[side][i] > links[side][best] } else { links[side][i] < links[side][best] };
            if better {
                i
            } else {
                best
            }
        });
        let Some(pick) = best else { break };
        taken[pick] = true;
        let v = pool[pick];
        halves[side].push(v);
        for &(u, w) in g.neighbors(v) {
            if position[u] != usize::MAX {
                links[side][position[u]] += w;
            }
        }
        side = 1 - side;
    }
    let spill = pool.iter().zip(&taken).filter(|&(_, &t)| !t).map(|(&v, _)| v).collect();
    Split { halves, spill }
}

/// One refinement step: every class becomes two classes of size `⌊|C|/2⌋`.
///
/// Classes are visited in index order. A class regular with all others is
/// unzipped. Otherwise it is paired with the not yet visited irregular
/// partner maximizing `S = d(C_i, C_j) + 1 − |d(C_i, C_i) − d(C_j, C_j)|`
/// (lowest index on ties), and both classes are split around their own side
/// of the pair's certificate. Vertices that do not fit join `C_0`. When
/// `|C_0|` reaches `εn`, it is dealt back round-robin in equal shares.
pub fn refine_partition(g: &Graph, p: &Partition, verdicts: &PairVerdicts, cfg: &SummarizationConfig) -> Result<Refinement> {
    let k = p.k();
    if verdicts.k() != k {
        return Err(Error::DimensionMismatch { left: verdicts.k(), right: k });
    }
    let size = p.class_size();
    if size < 2 {
        return Err(Error::RefinementExhausted(format!("classes of size {size} cannot be split")));
    }
    let target = size / 2;
    let density = density_matrix(g, p);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));

    let mut splits: Vec<Option<Split>> = (0..k).map(|_| None).collect();
    let mut events = Vec::new();
    for i in 0..k {
        if splits[i].is_some() {
            continue;
        }
        let irregular: Vec<usize> = (0..k).filter(|&j| j != i && !verdicts.get(i, j).is_regular()).collect();
        let partner = irregular.iter().copied().filter(|&j| splits[j].is_none()).reduce(|best, j| {
            let score = |j: usize| density[i][j] + 1.0 - (density[i][i] - density[j][j]).abs();
            if score(j) > score(best) {
                j
            } else {
                best
            }
        });
        let Some(j) = partner else {
            splits[i] = Some(unzip_class(g, p.classes[i].members(), target));
            events.push(if irregular.is_empty() {
                RefineEvent::Unzip { class: i }
            } else {
                RefineEvent::UnzipWithoutPartner { class: i }
            });
            continue;
        };
        for (me, other) in [(i, j), (j, i)] {
            let split = match verdicts.certificate_side(me, other) {
                Some((cert, rest)) if !cert.is_empty() => {
                    let cert_class = VertexClass::from_vec_unchecked(cert.members().to_vec());
                    let dense = internal_density(g, &cert_class)? >= cfg.sparsify_threshold;
                    events.push(if dense {
                        RefineEvent::Densify { class: me, partner: other }
                    } else {
                        RefineEvent::Sparsify { class: me, partner: other }
                    });
                    certificate_split(g, cert.members(), rest.members(), target, dense, &mut rng)
                }
                _ => {
                    events.push(RefineEvent::UnzipWithoutPartner { class: me });
                    unzip_class(g, p.classes[me].members(), target)
                }
            };
            splits[me] = Some(split);
        }
    }

    let mut exceptional = p.exceptional.members().to_vec();
    let mut classes = Vec::with_capacity(2 * k);
    for split in splits.into_iter().flatten() {
        exceptional.extend(split.spill);
        for half in split.halves {
            debug_assert_eq!(half.len(), target);
            classes.push(half);
        }
    }
    exceptional.sort_unstable();
    let n = g.n();
    let share = exceptional.len() / classes.len();
    if exceptional.len() as f64 >= p.epsilon * n as f64 && share > 0 {
        let count = classes.len();
        let moved = share * count;
        for (i, v) in exceptional.drain(..moved).enumerate() {
            classes[i % count].push(v);
        }
        events.push(RefineEvent::Redistribute { moved });
    }
    let partition = Partition {
        classes: classes.into_iter().map(VertexClass::from_vec_unchecked).collect(),
        exceptional: VertexClass::from_vec_unchecked(exceptional),
        epsilon: p.epsilon,
    };
    Ok(Refinement { partition, events })
}
