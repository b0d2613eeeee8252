//! From raw edge lists to evaluable link prediction instances.
//!
//! The pipeline: parse records ([`parse_edge_list`]), split them into train
//! and test sides by time or fraction ([`split_by_cutoff`],
//! [`split_two_snapshot`]), optionally keep only the top-degree fraction of
//! vertices ([`downsample_top_degree`]), then build an instance
//! ([`build_instance`]): train records become a simple graph, the graph is
//! reduced to its largest connected component, and the test records that
//! survive the reduction become the held-out link set. External string
//! labels are interned to dense ids in first-appearance order; the label
//! table rides along for readable output.

mod parse;
mod transform;

pub use parse::{parse_edge_list, parse_edge_list_path, ParsedEdges};
pub use transform::{
    downsample_top_degree, largest_connected_component, split_by_cutoff, split_two_snapshot,
    LccReduction, RecordSplit,
};

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graph::{Graph, VertexId};
use crate::{Error, Result};

/// One parsed input line: two endpoint labels and an optional timestamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub timestamp: Option<i64>,
}

impl EdgeRecord {
    /// Label pair with the lexicographically smaller label first.
    pub fn canonical_labels(&self) -> (&str, &str) {
        if self.u <= self.v {
            (&self.u, &self.v)
        } else {
            (&self.v, &self.u)
        }
    }
}

/// Field separator for edge list files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    /// Any run of whitespace.
    Whitespace,
    Char(char),
}

/// Declared file layout: delimiter plus 0-based column roles.
#[derive(Debug, Clone)]
pub struct FormatSpec {
    pub delimiter: Delimiter,
    pub u_column: usize,
    pub v_column: usize,
    /// `None` parses untimestamped records.
    pub timestamp_column: Option<usize>,
}

impl Default for FormatSpec {
    fn default() -> Self {
        FormatSpec {
            delimiter: Delimiter::Whitespace,
            u_column: 0,
            v_column: 1,
            timestamp_column: None,
        }
    }
}

/// How records divide into train and test.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitSpec {
    /// Train is everything at or before the cutoff timestamp.
    CutoffTime { cutoff: i64 },
    /// Train and test come from two separate input files.
    TwoSnapshot,
    /// Train is the earliest `train_fraction` of time-ordered records.
    Fraction { train_fraction: f64 },
}

/// A training graph with its held-out links. Test links are canonical
/// (`x < y`) non-edges of the training graph; `labels[x]` is the external
/// name of vertex `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkPredictionInstance {
    pub train: Graph,
    pub test_links: BTreeSet<(VertexId, VertexId)>,
    pub labels: Vec<String>,
}

impl LinkPredictionInstance {
    pub fn label(&self, x: VertexId) -> &str {
        &self.labels[x as usize]
    }

    /// Map from label to vertex id, for reading external pair files.
    pub fn label_index(&self) -> HashMap<&str, VertexId> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i as VertexId))
            .collect()
    }
}

/// Size and discard accounting for one instance build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceStats {
    /// Training graph before component reduction.
    pub full_vertices: usize,
    pub full_edges: usize,
    /// `2 |E| / n`.
    pub full_avg_degree: f64,
    /// Largest connected component of the training graph.
    pub lcc_vertices: usize,
    pub lcc_edges: usize,
    pub lcc_avg_degree: f64,
    pub test_records: usize,
    /// Distinct test links that survived every filter.
    pub test_links: usize,
    pub test_dropped_unknown_vertex: usize,
    pub test_dropped_outside_component: usize,
    pub test_dropped_training_edge: usize,
    pub test_dropped_duplicate: usize,
}

fn avg_degree(edges: usize, vertices: usize) -> f64 {
    if vertices == 0 {
        0.0
    } else {
        2.0 * edges as f64 / vertices as f64
    }
}

/// Builds the instance: intern train labels in first-appearance order,
/// assemble the simple training graph, reduce to the largest connected
/// component, then translate and filter the test records. Both streams of
/// drop-counting (unknown vertex, outside component, duplicate of a
/// training edge or of another test link) land in the stats.
pub fn build_instance(
    train_records: &[EdgeRecord],
    test_records: &[EdgeRecord],
) -> Result<(LinkPredictionInstance, InstanceStats)> {
    if train_records.is_empty() {
        return Err(Error::input("train split has no records"));
    }
    let mut index: HashMap<&str, VertexId> = HashMap::new();
    let mut labels: Vec<&str> = Vec::new();
    let mut pairs = Vec::with_capacity(train_records.len());
    for r in train_records {
        let mut intern = |label| -> VertexId {
            match index.get(label) {
                Some(&id) => id,
                None => {
                    let id = labels.len() as VertexId;
                    labels.push(label);
                    index.insert(label, id);
                    id
                }
            }
        };
        let u = intern(&r.u);
        let v = intern(&r.v);
        pairs.push((u, v));
    }
    let full = Graph::from_edges(labels.len(), &pairs)?;
    let lcc = largest_connected_component(&full);
    if lcc.graph.vertex_count() < 2 {
        return Err(Error::input(format!(
            "largest training component has {} vertex(es); nothing to predict",
            lcc.graph.vertex_count()
        )));
    }

    let mut test_links: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    let mut dropped_unknown = 0usize;
    let mut dropped_outside = 0usize;
    let mut dropped_edge = 0usize;
    let mut dropped_duplicate = 0usize;
    for r in test_records {
        let (fu, fv) = match (index.get(r.u.as_str()), index.get(r.v.as_str())) {
            (Some(&a), Some(&b)) => (a, b),
            _ => {
                dropped_unknown += 1;
                continue;
            }
        };
        let (u, v) = match (lcc.new_of_old[fu as usize], lcc.new_of_old[fv as usize]) {
            (Some(a), Some(b)) => (a.min(b), a.max(b)),
            _ => {
                dropped_outside += 1;
                continue;
            }
        };
        if lcc.graph.has_edge(u, v) {
            dropped_edge += 1;
            continue;
        }
        if !test_links.insert((u, v)) {
            dropped_duplicate += 1;
        }
    }

    let stats = InstanceStats {
        full_vertices: full.vertex_count(),
        full_edges: full.edge_count(),
        full_avg_degree: avg_degree(full.edge_count(), full.vertex_count()),
        lcc_vertices: lcc.graph.vertex_count(),
        lcc_edges: lcc.graph.edge_count(),
        lcc_avg_degree: avg_degree(lcc.graph.edge_count(), lcc.graph.vertex_count()),
        test_records: test_records.len(),
        test_links: test_links.len(),
        test_dropped_unknown_vertex: dropped_unknown,
        test_dropped_outside_component: dropped_outside,
        test_dropped_training_edge: dropped_edge,
        test_dropped_duplicate: dropped_duplicate,
    };
    let instance = LinkPredictionInstance {
        labels: lcc
            .old_of_new
            .iter()
            .map(|&old| labels[old as usize].to_string())
            .collect(),
        train: lcc.graph,
        test_links,
    };
    Ok((instance, stats))
}

/// Everything needed to trace an instance back to its inputs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InstanceManifest {
    /// Input files, train first.
    pub sources: Vec<String>,
    pub split: SplitSpec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub downsample_fraction: Option<f64>,
    pub stats: InstanceStats,
}

const LABELS_FILE: &str = "labels.tsv";
const TRAIN_FILE: &str = "train.edges";
const TEST_FILE: &str = "test.links";
const MANIFEST_FILE: &str = "manifest.json";

/// Writes an instance directory: `labels.tsv` (line i names vertex i),
/// `train.edges` and `test.links` (internal id pairs, one per line), and
/// `manifest.json`. Using internal ids in the pair files makes a reloaded
/// instance bit-identical, tie-breaking included.
pub fn save_instance(
    dir: &Path,
    instance: &LinkPredictionInstance,
    manifest: &InstanceManifest,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write_pairs = |name: &str, pairs: &mut dyn Iterator<Item = (u32, u32)>| -> Result<()> {
        let path = dir.join(name);
        let mut w = BufWriter::new(std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?);
        for (x, y) in pairs {
            writeln!(w, "{x} {y}").map_err(|e| Error::io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))
    };
    let labels_path = dir.join(LABELS_FILE);
    let mut w =
        BufWriter::new(std::fs::File::create(&labels_path).map_err(|e| Error::io(&labels_path, e))?);
    for label in &instance.labels {
        writeln!(w, "{label}").map_err(|e| Error::io(&labels_path, e))?;
    }
    w.flush().map_err(|e| Error::io(&labels_path, e))?;
    write_pairs(TRAIN_FILE, &mut instance.train.edges())?;
    write_pairs(TEST_FILE, &mut instance.test_links.iter().copied())?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::input(format!("manifest serialization failed: {e}")))?;
    std::fs::write(&manifest_path, json + "\n").map_err(|e| Error::io(&manifest_path, e))?;
    Ok(())
}

/// Loads an instance directory written by [`save_instance`].
pub fn load_instance(dir: &Path) -> Result<(LinkPredictionInstance, InstanceManifest)> {
    let labels_path = dir.join(LABELS_FILE);
    let file = std::fs::File::open(&labels_path).map_err(|e| Error::io(&labels_path, e))?;
    let labels: Vec<String> = std::io::BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(&labels_path, e))?;
    let n = labels.len();
    let read_pairs = |name: &str| -> Result<Vec<(u32, u32)>> {
        let path = dir.join(name);
        let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut pairs = Vec::new();
        for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(&path, e))?;
            let mut parts = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<u32> {
                s.and_then(|t| t.parse().ok()).ok_or_else(|| {
                    Error::input(format!("{}: line {}: expected two ids", path.display(), idx + 1))
                })
            };
            let x = parse(parts.next())?;
            let y = parse(parts.next())?;
            if x as usize >= n || y as usize >= n {
                return Err(Error::input(format!(
                    "{}: line {}: id outside [0, {n})",
                    path.display(),
                    idx + 1
                )));
            }
            pairs.push((x, y));
        }
        Ok(pairs)
    };
    let train = Graph::from_edges(n, &read_pairs(TRAIN_FILE)?)?;
    let mut test_links = BTreeSet::new();
    for (x, y) in read_pairs(TEST_FILE)? {
        if x == y || train.has_edge(x, y) {
            return Err(Error::input(format!(
                "test link ({x}, {y}) is not a non-edge of the training graph"
            )));
        }
        test_links.insert((x.min(y), x.max(y)));
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    let json = std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: InstanceManifest = serde_json::from_str(&json)
        .map_err(|e| Error::input(format!("{}: {e}", manifest_path.display())))?;
    Ok((
        LinkPredictionInstance {
            train,
            test_links,
            labels,
        },
        manifest,
    ))
}
