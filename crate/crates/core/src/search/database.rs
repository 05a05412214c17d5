use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spectrum::{laplacian_spectrum, spectral_distance, Spectrum};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::regularity::{summarize, SummarizationConfig};
use crate::summary::{build_reduced_graph, ReducedGraph, WeightRule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatabaseEntry {
    pub id: String,
    pub summary: ReducedGraph,
    /// Laplacian spectrum of the summary graph, one value per class.
    pub spectrum: Spectrum,
    /// Laplacian spectrum of the original graph, stored when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_spectrum: Option<Spectrum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_meta: Option<serde_json::Value>,
}

/// How a graph is turned into a database entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexOptions {
    pub summarization: SummarizationConfig,
    /// Density floor `d′`; `None` uses ε.
    pub d_prime: Option<f64>,
    pub weight_rule: WeightRule,
    pub keep_raw_spectrum: bool,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            summarization: SummarizationConfig::default(),
            d_prime: None,
            weight_rule: WeightRule::default(),
            keep_raw_spectrum: false,
        }
    }
}

/// Summarizes `g` and computes the spectra stored for it.
pub fn index_graph(id: &str, g: &Graph, opts: &IndexOptions, source_meta: Option<serde_json::Value>) -> Result<DatabaseEntry> {
    let cfg = &opts.summarization;
    let summarized = summarize(g, cfg)?;
    let d_prime = opts.d_prime.unwrap_or(cfg.epsilon);
    let mut summary = build_reduced_graph(g, &summarized.best, &summarized.verdicts, d_prime, opts.weight_rule)?;
    summary.class_members = None;
    let spectrum = laplacian_spectrum(&summary.to_graph())?;
    let raw_spectrum = if opts.keep_raw_spectrum { Some(laplacian_spectrum(g)?) } else { None };
    Ok(DatabaseEntry { id: id.to_string(), summary, spectrum, raw_spectrum, source_meta })
}

/// Which spectra a query compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Summary,
    Raw,
}

/// Seconds spent summarizing the query, computing its eigenvalues, and
/// computing distances to the database.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingBreakdown {
    pub t_s: f64,
    pub t_eig: f64,
    pub t_sd: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    pub ranking: Vec<(String, f64)>,
    pub timing: TimingBreakdown,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct Manifest {
    /// Entry id to file name.
    entries: BTreeMap<String, String>,
}

/// Directory of JSON entries indexed by `manifest.json`.
#[derive(Debug)]
pub struct Database {
    dir: PathBuf,
    entries: Vec<DatabaseEntry>,
}

const MANIFEST: &str = "manifest.json";

fn entry_file(id: &str) -> String {
    let hex: String = id.bytes().map(|b| format!("{b:02x}")).collect();
    format!("entry-{hex}.json")
}

impl Database {
    /// Opens the database in `dir`, creating an empty one if needed.
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let manifest_path = dir.join(MANIFEST);
        let manifest: Manifest = if manifest_path.exists() {
            serde_json::from_str(&fs::read_to_string(&manifest_path)?)?
        } else {
            Manifest::default()
        };
        let entries = manifest
            .entries
            .values()
            .map(|file| Ok(serde_json::from_str(&fs::read_to_string(dir.join(file))?)?))
            .collect::<Result<Vec<DatabaseEntry>>>()?;
        Ok(Database { dir: dir.to_path_buf(), entries })
    }

    /// File holding the entry stored under `id`.
    pub fn entry_path(&self, id: &str) -> PathBuf {
        self.dir.join(entry_file(id))
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join(MANIFEST)
    }

    /// Entries sorted by id.
    pub fn entries(&self) -> &[DatabaseEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&DatabaseEntry> {
        self.entries.binary_search_by(|e| e.id.as_str().cmp(id)).ok().map(|i| &self.entries[i])
    }

    /// Stores an entry. Re-adding an identical entry is a no-op; a different
    /// entry under an existing id is rejected.
    pub fn insert(&mut self, entry: DatabaseEntry) -> Result<&DatabaseEntry> {
        match self.entries.binary_search_by(|e| e.id.cmp(&entry.id)) {
            Ok(i) if self.entries[i] == entry => Ok(&self.entries[i]),
            Ok(_) => Err(Error::DuplicateId(entry.id)),
            Err(i) => {
                let file = entry_file(&entry.id);
                write_atomic(&self.dir.join(&file), &serde_json::to_string_pretty(&entry)?)?;
                self.entries.insert(i, entry);
                let manifest = Manifest { entries: self.entries.iter().map(|e| (e.id.clone(), entry_file(&e.id))).collect() };
                write_atomic(&self.dir.join(MANIFEST), &serde_json::to_string_pretty(&manifest)?)?;
                Ok(&self.entries[i])
            }
        }
    }

    /// Summarizes `g` and stores it under `id`.
    pub fn add(&mut self, id: &str, g: &Graph, opts: &IndexOptions, source_meta: Option<serde_json::Value>) -> Result<&DatabaseEntry> {
        let entry = index_graph(id, g, opts, source_meta)?;
        self.insert(entry)
    }

    /// Top-`k` entries closest to `q`, ascending by distance, ties by id.
    pub fn query(&self, q: &Graph, k: usize, opts: &IndexOptions, l: Option<usize>, mode: SearchMode) -> Result<QueryResult> {
        if self.entries.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        let mut timing = TimingBreakdown::default();
        let spectrum = match mode {
            SearchMode::Summary => {
                let start = Instant::now();
                let cfg = &opts.summarization;
                let summarized = summarize(q, cfg)?;
                let d_prime = opts.d_prime.unwrap_or(cfg.epsilon);
                let summary = build_reduced_graph(q, &summarized.best, &summarized.verdicts, d_prime, opts.weight_rule)?;
                timing.t_s = start.elapsed().as_secs_f64();
                let start = Instant::now();
                let s = laplacian_spectrum(&summary.to_graph())?;
                timing.t_eig = start.elapsed().as_secs_f64();
                s
            }
            SearchMode::Raw => {
                let start = Instant::now();
                let s = laplacian_spectrum(q)?;
                timing.t_eig = start.elapsed().as_secs_f64();
                s
            }
        };
        let start = Instant::now();
        let ranking = rank(&spectrum, &self.entries, k, l, mode)?;
        timing.t_sd = start.elapsed().as_secs_f64();
        Ok(QueryResult { ranking, timing })
    }
}

/// Ranks `entries` by spectral distance to `query`, keeping the first `k`.
pub fn rank(query: &Spectrum, entries: &[DatabaseEntry], k: usize, l: Option<usize>, mode: SearchMode) -> Result<Vec<(String, f64)>> {
    if entries.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    if k > entries.len() {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds database size {}", entries.len())));
    }
    let mut scored = entries
        .par_iter()
        .map(|e| {
            let stored = match mode {
                SearchMode::Summary => &e.spectrum,
                SearchMode::Raw => e
                    .raw_spectrum
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument(format!("entry `{}` has no raw spectrum", e.id)))?,
            };
            Ok((e.id.clone(), spectral_distance(query, stored, l)?))
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored)
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
