//! Record-level transforms between parsing and instance construction:
//! train/test splitting, largest-component reduction, and top-degree
//! downsampling.

use std::collections::{HashMap, HashSet};

use super::{EdgeRecord, SplitSpec};
use crate::graph::{Graph, VertexId};
use crate::{Error, Result};

/// A partition of records into train and test sides.
#[derive(Debug, Clone)]
pub struct RecordSplit {
    pub train: Vec<EdgeRecord>,
    pub test: Vec<EdgeRecord>,
}

/// Splits one record stream by time. `CutoffTime` sends records with
/// `timestamp <= cutoff` to train; `Fraction` stably sorts by timestamp and
/// cuts at `round(fraction * len)`. Records keep their file order within
/// each side. The two-snapshot mode takes two streams and lives in
/// [`split_two_snapshot`].
pub fn split_by_cutoff(records: Vec<EdgeRecord>, spec: &SplitSpec) -> Result<RecordSplit> {
    match *spec {
        SplitSpec::CutoffTime { cutoff } => {
            if let Some(missing) = records.iter().position(|r| r.timestamp.is_none()) {
                return Err(Error::input(format!(
                    "cutoff split requires timestamps on every record; record {} ({} {}) has none",
                    missing, records[missing].u, records[missing].v
                )));
            }
            let (train, test) = records
                .into_iter()
                .partition(|r| r.timestamp.unwrap() <= cutoff);
            Ok(RecordSplit { train, test })
        }
        SplitSpec::Fraction { train_fraction } => {
            if !(train_fraction > 0.0 && train_fraction < 1.0) {
                return Err(Error::config(format!(
                    "train fraction must lie in (0, 1), got {train_fraction}"
                )));
            }
            let timestamped = records.iter().filter(|r| r.timestamp.is_some()).count();
            if timestamped != 0 && timestamped != records.len() {
                return Err(Error::input(
                    "fraction split needs timestamps on all records or on none",
                ));
            }
            let mut ordered = records;
            if timestamped != 0 {
                // Stable: equal timestamps keep file order.
                ordered.sort_by_key(|r| r.timestamp.unwrap());
            }
            let cut = ((train_fraction * ordered.len() as f64) + 0.5).floor() as usize;
            let cut = cut.min(ordered.len());
            let test = ordered.split_off(cut);
            Ok(RecordSplit {
                train: ordered,
                test,
            })
        }
        SplitSpec::TwoSnapshot => Err(Error::config(
            "two-snapshot split takes two record streams; use split_two_snapshot",
        )),
    }
}

/// Two-snapshot split: train is the early stream; test keeps the late
/// records whose endpoints both already appear in the early stream and
/// which are not early edges themselves.
pub fn split_two_snapshot(early: Vec<EdgeRecord>, late: Vec<EdgeRecord>) -> RecordSplit {
    let vertices: HashSet<&str> = early
        .iter()
        .flat_map(|r| [r.u.as_str(), r.v.as_str()])
        .collect();
    let edges: HashSet<(&str, &str)> = early.iter().map(|r| r.canonical_labels()).collect();
    let test = late
        .iter()
        .filter(|r| {
            vertices.contains(r.u.as_str())
                && vertices.contains(r.v.as_str())
                && !edges.contains(&r.canonical_labels())
        })
        .cloned()
        .collect();
    RecordSplit { train: early, test }
}

/// Largest connected component with its id translations.
#[derive(Debug, Clone)]
pub struct LccReduction {
    pub graph: Graph,
    /// Original id of each component vertex; ascending.
    pub old_of_new: Vec<VertexId>,
    /// Component id of each original vertex, `None` outside the component.
    pub new_of_old: Vec<Option<VertexId>>,
}

/// Reduces to the largest connected component. Equal-size components tie
/// toward the one containing the smallest original vertex id. Kept
/// vertices are renumbered densely in ascending original order.
pub fn largest_connected_component(graph: &Graph) -> LccReduction {
    let n = graph.vertex_count();
    let comp = graph.components();
    let comp_count = comp.iter().map(|&c| c + 1).max().unwrap_or(0) as usize;
    let mut sizes = vec![0usize; comp_count];
    for &c in &comp {
        sizes[c as usize] += 1;
    }
    // Component ids are issued in order of their smallest vertex, so the
    // first maximum implements the tie rule.
    let winner = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| c as u32)
        .unwrap_or(0);
    let mut old_of_new = Vec::new();
    let mut new_of_old = vec![None; n];
    for v in 0..n {
        if comp[v] == winner {
            new_of_old[v] = Some(old_of_new.len() as VertexId);
            old_of_new.push(v as VertexId);
        }
    }
    let edges: Vec<(VertexId, VertexId)> = graph
        .edges()
        .filter_map(|(u, v)| Some((new_of_old[u as usize]?, new_of_old[v as usize]?)))
        .collect();
    let graph = Graph::from_edges(old_of_new.len(), &edges)
        .expect("component edges are in range");
    LccReduction {
        graph,
        old_of_new,
        new_of_old,
    }
}

/// Keeps records whose endpoints both rank in the top `ceil(fraction * n)`
/// vertices by degree. Degrees are computed on the simple graph over all
/// the records; ties in degree keep the earlier-appearing label. Record
/// order and timestamps pass through untouched.
pub fn downsample_top_degree(records: &[EdgeRecord], fraction: f64) -> Result<Vec<EdgeRecord>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::config(format!(
            "downsample fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let mut pairs = Vec::with_capacity(records.len());
    for r in records {
        let next = ids.len() as u32;
        let u = *ids.entry(r.u.as_str()).or_insert(next);
        let next = ids.len() as u32;
        let v = *ids.entry(r.v.as_str()).or_insert(next);
        pairs.push((u, v));
    }
    let n = ids.len();
    let graph = Graph::from_edges(n, &pairs)?;
    let keep_count = (fraction * n as f64).ceil() as usize;
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
    let kept: HashSet<u32> = order[..keep_count.min(n)].iter().copied().collect();
    Ok(records
        .iter()
        .zip(&pairs)
        .filter(|(_, &(u, v))| kept.contains(&u) && kept.contains(&v))
        .map(|(r, _)| r.clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(u: &str, v: &str, ts: Option<i64>) -> EdgeRecord {
        EdgeRecord {
            u: u.to_string(),
            v: v.to_string(),
            timestamp: ts,
        }
    }

    #[test]
    fn cutoff_partitions_by_timestamp() {
        let records = vec![
            rec("a", "b", Some(10)),
            rec("b", "c", Some(20)),
            rec("c", "d", Some(15)),
            rec("d", "e", Some(21)),
        ];
        let split = split_by_cutoff(records, &SplitSpec::CutoffTime { cutoff: 15 }).unwrap();
        assert_eq!(split.train.len(), 2);
        assert_eq!(split.test.len(), 2);
        assert_eq!(split.train[1].u, "c");
        assert_eq!(split.test[0].u, "b");
    }

    #[test]
    fn cutoff_requires_timestamps() {
        let records = vec![rec("a", "b", Some(1)), rec("b", "c", None)];
        let err = split_by_cutoff(records, &SplitSpec::CutoffTime { cutoff: 5 }).unwrap_err();
        assert!(err.to_string().contains("b c"), "{err}");
    }

    #[test]
    fn cutoff_below_everything_gives_empty_train() {
        let records = vec![rec("a", "b", Some(10))];
        let split = split_by_cutoff(records, &SplitSpec::CutoffTime { cutoff: 5 }).unwrap();
        assert!(split.train.is_empty());
        assert_eq!(split.test.len(), 1);
    }

    #[test]
    fn fraction_cuts_after_stable_time_sort() {
        let records: Vec<EdgeRecord> = (0..10)
            .map(|i| rec(&format!("u{i}"), &format!("v{i}"), Some(100 - (i as i64 % 3))))
            .collect();
        let split =
            split_by_cutoff(records, &SplitSpec::Fraction { train_fraction: 0.8 }).unwrap();
        assert_eq!(split.train.len(), 8);
        assert_eq!(split.test.len(), 2);
        let max_train = split.train.iter().map(|r| r.timestamp.unwrap()).max();
        let min_test = split.test.iter().map(|r| r.timestamp.unwrap()).min();
        assert!(max_train <= min_test);
    }

    #[test]
    fn fraction_without_timestamps_uses_file_order() {
        let records = vec![
            rec("a", "b", None),
            rec("b", "c", None),
            rec("c", "d", None),
            rec("d", "e", None),
        ];
        let split =
            split_by_cutoff(records, &SplitSpec::Fraction { train_fraction: 0.5 }).unwrap();
        assert_eq!(split.train.len(), 2);
        assert_eq!(split.train[1].u, "b");
        assert_eq!(split.test[0].u, "c");
    }

    #[test]
    fn fraction_rejects_mixed_and_out_of_range() {
        let mixed = vec![rec("a", "b", Some(1)), rec("b", "c", None)];
        assert!(split_by_cutoff(mixed, &SplitSpec::Fraction { train_fraction: 0.5 }).is_err());
        let records = vec![rec("a", "b", None)];
        assert!(
            split_by_cutoff(records, &SplitSpec::Fraction { train_fraction: 1.5 }).is_err()
        );
    }

    #[test]
    fn two_snapshot_filters_new_vertices_and_old_edges() {
        let early = vec![rec("a", "b", None), rec("b", "c", None)];
        let late = vec![
            rec("a", "c", None), // kept: both vertices known, new pair
            rec("b", "a", None), // dropped: early edge, reversed order
            rec("a", "x", None), // dropped: x is unseen
        ];
        let split = split_two_snapshot(early, late);
        assert_eq!(split.train.len(), 2);
        assert_eq!(split.test.len(), 1);
        assert_eq!((split.test[0].u.as_str(), split.test[0].v.as_str()), ("a", "c"));
    }

    #[test]
    fn lcc_picks_largest_then_smallest_id() {
        // Components {0,1,2} and {3,4,5}: equal size, first wins.
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let lcc = largest_connected_component(&g);
        assert_eq!(lcc.old_of_new, vec![0, 1, 2]);
        assert_eq!(lcc.graph.vertex_count(), 3);
        assert_eq!(lcc.graph.edge_count(), 2);
        assert_eq!(lcc.new_of_old[4], None);

        // Make the second strictly larger; it must win instead.
        let g = Graph::from_edges(6, &[(0, 1), (3, 4), (4, 5), (3, 5)]).unwrap();
        let lcc = largest_connected_component(&g);
        assert_eq!(lcc.old_of_new, vec![3, 4, 5]);
        assert_eq!(lcc.new_of_old[3], Some(0));
    }

    #[test]
    fn lcc_of_connected_graph_is_identity() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let lcc = largest_connected_component(&g);
        assert_eq!(lcc.graph, g);
        assert_eq!(lcc.old_of_new, vec![0, 1, 2, 3]);
    }

    #[test]
    fn downsample_keeps_ceil_fraction_by_degree() {
        // Path a-b-c-d-e: degrees b=c=d=2, a=e=1. Half of 5 vertices
        // rounds up to 3: keep {b, c, d}, surviving records b-c and c-d.
        let records = vec![
            rec("a", "b", Some(1)),
            rec("b", "c", Some(2)),
            rec("c", "d", Some(3)),
            rec("d", "e", Some(4)),
        ];
        let kept = downsample_top_degree(&records, 0.5).unwrap();
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].u, "b");
        assert_eq!(kept[1].u, "c");
        assert_eq!(kept[0].timestamp, Some(2));
    }

    #[test]
    fn downsample_tie_prefers_earlier_label() {
        // Two disjoint edges: all degrees 1, keep ceil(0.5 * 4) = 2, so the
        // two earliest labels a and b survive and with them their record.
        let records = vec![rec("a", "b", None), rec("c", "d", None)];
        let kept = downsample_top_degree(&records, 0.5).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].u, "a");
    }

    #[test]
    fn downsample_full_fraction_keeps_everything() {
        let records = vec![rec("a", "b", None), rec("c", "d", None)];
        assert_eq!(downsample_top_degree(&records, 1.0).unwrap().len(), 2);
        assert!(downsample_top_degree(&records, 0.0).is_err());
    }
}
