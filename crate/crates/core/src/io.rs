//! Whitespace-separated edge lists.
//!
//! Each non-comment line is `u v` or `u v w`. Vertex tokens are arbitrary
//! strings, mapped to dense indices in first-seen order. A line holding a
//! single token declares an isolated vertex. `#` starts a comment.

use std::fmt::Write as _;
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// A graph together with the original vertex tokens, `ids[i]` naming vertex `i`.
#[derive(Clone, Debug)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub ids: Vec<String>,
}

impl LabeledGraph {
    /// Labels vertices with their decimal indices.
    pub fn with_index_ids(graph: Graph) -> Self {
        let ids = (0..graph.n()).map(|i| i.to_string()).collect();
        LabeledGraph { graph, ids }
    }
}

/// Vertex tokens and `(u, v, w)` records in file order.
fn parse_records(text: &str) -> Result<(Vec<String>, Vec<(usize, usize, f64)>)> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut ids: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |token: &str| -> usize {
        if let Some(&i) = index.get(token) {
            return i;
        }
        ids.push(token.to_string());
        index.insert(token.to_string(), ids.len() - 1);
        ids.len() - 1
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |message: String| Error::Parse { line: lineno + 1, message };
        match tokens.as_slice() {
            [] => {}
            [v] => {
                intern(v);
            }
            [u, v] | [u, v, _] => {
                let w = match tokens.get(2) {
                    Some(t) => t.parse::<f64>().map_err(|e| parse_err(format!("bad weight `{t}`: {e}")))?,
                    None => 1.0,
                };
                if u == v {
                    return Err(parse_err(format!("self-loop on `{u}`")));
                }
                let (a, b) = (intern(u), intern(v));
                edges.push((a, b, w));
            }
            _ => return Err(parse_err(format!("expected 1 to 3 fields, found {}", tokens.len()))),
        }
    }
    Ok((ids, edges))
}

pub fn parse_edge_list(text: &str) -> Result<LabeledGraph> {
    let (ids, edges) = parse_records(text)?;
    let graph = Graph::from_edges(ids.len(), edges)?;
    Ok(LabeledGraph { graph, ids })
}

/// Reads each line as an arc `u -> v`, keeps the largest strongly connected
/// component and forgets directions. Weights are ignored.
pub fn parse_directed_edge_list(text: &str) -> Result<LabeledGraph> {
    let (ids, arcs) = parse_records(text)?;
    let n = ids.len();
    let mut out = vec![Vec::new(); n];
    for &(u, v, _) in &arcs {
        out[u].push(v);
    }
    let keep = largest_scc(&out);
    let mut position = vec![usize::MAX; n];
    for (i, &v) in keep.iter().enumerate() {
        position[v] = i;
    }
    let edges = arcs.iter().filter_map(|&(u, v, _)| {
        let (a, b) = (position[u], position[v]);
        (a != usize::MAX && b != usize::MAX).then_some((a, b))
    });
    let graph = Graph::from_unweighted_edges(keep.len(), edges.collect::<Vec<_>>())?;
    Ok(LabeledGraph { graph, ids: keep.iter().map(|&v| ids[v].clone()).collect() })
}

pub fn read_directed_edge_list(path: &Path) -> Result<LabeledGraph> {
    parse_directed_edge_list(&fs::read_to_string(path)?)
}

/// Vertices of the largest strongly connected component in increasing order
/// (iterative Kosaraju); ties go to the component found first.
fn largest_scc(out: &[Vec<usize>]) -> Vec<usize> {
    let n = out.len();
    let mut reverse = vec![Vec::new(); n];
    for (u, vs) in out.iter().enumerate() {
        for &v in vs {
            reverse[v].push(u);
        }
    }
    // finishing order from forward DFS
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut stack = vec![(start, 0usize)];
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if let Some(&v) = out[u].get(*next) {
                *next += 1;
                if !visited[v] {
                    visited[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }
    let mut component = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for &root in order.iter().rev() {
        if component[root] != usize::MAX {
            continue;
        }
        let c = sizes.len();
        let mut size = 0;
        component[root] = c;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in &reverse[u] {
                if component[v] == usize::MAX {
                    component[v] = c;
                    stack.push(v);
                }
            }
        }
        sizes.push(size);
    }
    let Some(best) = (0..sizes.len()).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))) else {
        return Vec::new();
    };
    (0..n).filter(|&v| component[v] == best).collect()
}

pub fn read_edge_list(path: &Path) -> Result<LabeledGraph> {
    parse_edge_list(&fs::read_to_string(path)?)
}

/// Serializes a graph. All vertices are declared first so isolated vertices
/// and the index order survive a round trip.
pub fn format_edge_list(g: &LabeledGraph) -> String {
    let mut out = String::new();
    for id in &g.ids {
        let _ = writeln!(out, "{id}");
    }
    let weighted = g.graph.is_weighted();
    for (u, v, w) in g.graph.edges() {
        if weighted {
            let _ = writeln!(out, "{} {} {}", g.ids[u], g.ids[v], w);
        } else {
            let _ = writeln!(out, "{} {}", g.ids[u], g.ids[v]);
        }
    }
    out
}

pub fn write_edge_list(path: &Path, g: &LabeledGraph) -> Result<()> {
    fs::write(path, format_edge_list(g))?;
    Ok(())
}

/// Path of the id mapping written next to an output file.
pub fn ids_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".ids.csv");
    PathBuf::from(name)
}

pub fn format_id_map(ids: &[String]) -> String {
    let mut out = String::from("index,id\n");
    for (i, id) in ids.iter().enumerate() {
        let _ = writeln!(out, "{i},{id}");
    }
    out
}
