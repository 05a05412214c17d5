use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_all_pairs, compression_rate, index_of_partition, refine_partition, Partition, PairVerdicts, RefineEvent};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexClass};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummarizationConfig {
    /// Regularity tolerance, strictly inside `(0, 1/16)`.
    pub epsilon: f64,
    /// Refined partitions with a compression rate below this are discarded.
    pub c_min: f64,
    /// Maximum number of refinement steps.
    pub max_iterations: usize,
    /// Certificates with internal density at or above this are densified.
    pub sparsify_threshold: f64,
    pub rng_seed: u64,
    /// Number of classes in the initial random partition.
    pub initial_classes: usize,
}

impl Default for SummarizationConfig {
    fn default() -> Self {
        SummarizationConfig {
            epsilon: 0.05,
            c_min: 0.9,
            max_iterations: 10,
            sparsify_threshold: 0.5,
            rng_seed: 0,
            initial_classes: 4,
        }
    }
}

impl SummarizationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0 / 16.0) {
            return Err(Error::Config(format!("epsilon {} outside (0, 1/16)", self.epsilon)));
        }
        if !(0.0..1.0).contains(&self.c_min) {
            return Err(Error::Config(format!("c_min {} outside [0, 1)", self.c_min)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if self.initial_classes == 0 {
            return Err(Error::Config("initial_classes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub k: usize,
    pub ind: f64,
    pub irregular_pairs: usize,
    pub compression_rate: f64,
    pub class_size: usize,
    pub exceptional: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// At most `ε (k choose 2)` irregular pairs remain.
    Regular,
    IterationCap,
    /// Halving the classes would leave fewer than two vertices per class.
    Exhausted,
    /// The next refinement would fall below the minimum compression rate.
    CompressionFloor,
}

#[derive(Clone, Debug)]
pub struct Summarized {
    pub best: Partition,
    pub verdicts: PairVerdicts,
    pub best_iteration: usize,
    pub trace: Vec<IterationRecord>,
    pub events: Vec<Vec<RefineEvent>>,
    pub stop: StopReason,
}

/// Seeded shuffle chunked into `b` classes of `⌊n/b⌋`; the rest is `C_0`.
pub fn initial_partition(n: usize, cfg: &SummarizationConfig) -> Result<Partition> {
    let b = cfg.initial_classes;
    if n < 4 || n / b < 1 {
        return Err(Error::InputTooSmall(format!("{n} vertices cannot form {b} initial classes")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.rng_seed));
    let size = n / b;
    let classes = order.chunks(size).take(b).map(|c| VertexClass::from_vec_unchecked(c.to_vec())).collect();
    let exceptional = VertexClass::from_vec_unchecked(order[b * size..].to_vec());
    Ok(Partition { classes, exceptional, epsilon: cfg.epsilon })
}

/// Alternates pair checking and refinement, returning the partition with the
/// largest index seen (earliest on ties) along with the per-step trace.
pub fn summarize(g: &Graph, cfg: &SummarizationConfig) -> Result<Summarized> {
    cfg.validate()?;
    let n = g.n();
    let mut current = initial_partition(n, cfg)?;
    let mut trace = Vec::new();
    let mut events = Vec::new();
    let mut best: Option<(Partition, PairVerdicts, f64, usize)> = None;
    let mut iteration = 0;
    let stop = loop {
        let verdicts = check_all_pairs(g, &current)?;
        let k = current.k();
        let ind = index_of_partition(g, &current);
        let irregular = verdicts.irregular_count();
        trace.push(IterationRecord {
            iteration,
            k,
            ind,
            irregular_pairs: irregular,
            compression_rate: compression_rate(k, n)?,
            class_size: current.class_size(),
            exceptional: current.exceptional.len(),
        });
        let improves = best.as_ref().map_or(true, |b| ind > b.2);
        if improves {
            best = Some((current.clone(), verdicts.clone(), ind, iteration));
        }
        let pairs = k * k.saturating_sub(1) / 2;
        if irregular as f64 <= cfg.epsilon * pairs as f64 {
            break StopReason::Regular;
        }
        if iteration >= cfg.max_iterations {
            break StopReason::IterationCap;
        }
        if current.class_size() / 2 < 2 {
            break StopReason::Exhausted;
        }
        let refined = refine_partition(g, &current, &verdicts, cfg)?;
        if compression_rate(refined.partition.k(), n)? < cfg.c_min {
            break StopReason::CompressionFloor;
        }
        events.push(refined.events);
        current = refined.partition;
        iteration += 1;
    };
    let (best, verdicts, _, best_iteration) = best.expect("initial partition is always recorded");
    Ok(Summarized { best, verdicts, best_iteration, trace, events, stop })
}
