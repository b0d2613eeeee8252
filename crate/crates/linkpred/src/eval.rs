//! Precision-at-k scoring, report serialization, and scaling fits.
//!
//! A prediction run is judged by set membership: of the k pairs a predictor
//! ranked highest, how many are held-out links. [`evaluate`] checks the
//! prediction list for predictor bugs (train edges, duplicates, out-of-range
//! ids) and counts hits; [`random_baseline`] gives the accuracy a uniformly
//! random non-edge picker would expect, the yardstick that makes small
//! percentages meaningful on sparse graphs.

use std::collections::HashSet;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::LinkPredictionInstance;
use crate::predictors::ScoredPair;
use crate::{Error, Result};

/// How many links to predict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KPolicy {
    /// Ten percent of the held-out links, rounded half-up, at least 1.
    TenPercent,
    Fixed(usize),
}

/// Resolves a [`KPolicy`] against the instance's held-out link count.
pub fn choose_k(instance: &LinkPredictionInstance, policy: KPolicy) -> usize {
    match policy {
        KPolicy::Fixed(k) => k,
        KPolicy::TenPercent => {
            let tenth = (instance.test_links.len() as f64 / 10.0).round() as usize;
            tenth.max(1)
        }
    }
}

/// Expected accuracy of predicting uniformly random non-edges, in percent:
/// `100 |test| / (n(n-1)/2 - |E_train|)`.
pub fn random_baseline(instance: &LinkPredictionInstance) -> f64 {
    random_baseline_from_counts(
        instance.train.vertex_count(),
        instance.train.edge_count(),
        instance.test_links.len(),
    )
}

/// Counts-only form of [`random_baseline`], usable straight from a manifest.
pub fn random_baseline_from_counts(n: usize, train_edges: usize, test_links: usize) -> f64 {
    let non_edges = n as f64 * (n as f64 - 1.0) / 2.0 - train_edges as f64;
    if non_edges <= 0.0 {
        0.0
    } else {
        100.0 * test_links as f64 / non_edges
    }
}

/// One row of an experiment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub predictor: String,
    /// Number of links actually predicted.
    pub k: usize,
    /// Predicted pairs that are held-out links.
    pub correct: usize,
    /// `100 * correct / k`.
    pub percent: f64,
    /// Wall-clock time of the full predictor call.
    pub seconds: f64,
    pub baseline_percent: f64,
}

/// Scores a prediction list against the instance's held-out links.
///
/// Order inside the list does not matter; only membership does. The list is
/// validated first: a pair that is a training edge, a duplicate, or out of
/// range is a predictor bug and turns into an error rather than a silent
/// zero. `seconds` is whatever the caller measured around the predictor
/// call.
pub fn evaluate(
    predictor: &str,
    predictions: &[ScoredPair],
    instance: &LinkPredictionInstance,
    seconds: f64,
) -> Result<EvaluationReport> {
    let n = instance.train.vertex_count() as u32;
    let mut seen = HashSet::with_capacity(predictions.len());
    let mut correct = 0usize;
    for p in predictions {
        if p.x >= p.y || p.y >= n {
            return Err(Error::input(format!(
                "invalid predicted pair ({}, {}): ids must be distinct, ordered, below {n}",
                p.x, p.y
            )));
        }
        if instance.train.has_edge(p.x, p.y) {
            return Err(Error::input(format!(
                "predicted pair ({}, {}) is already a training edge",
                p.x, p.y
            )));
        }
        if !seen.insert((p.x, p.y)) {
            return Err(Error::input(format!(
                "predicted pair ({}, {}) appears twice",
                p.x, p.y
            )));
        }
        if instance.test_links.contains(&(p.x, p.y)) {
            correct += 1;
        }
    }
    let k = predictions.len();
    let percent = if k == 0 {
        0.0
    } else {
        100.0 * correct as f64 / k as f64
    };
    Ok(EvaluationReport {
        predictor: predictor.to_string(),
        k,
        correct,
        percent,
        seconds,
        baseline_percent: random_baseline(instance),
    })
}

const REPORT_HEADER: &str = "predictor\tk\tcorrect\tpercent\tseconds\tbaseline_percent";

/// Writes report rows as tab-separated values with a header line. Floats are
/// printed in shortest round-trip form so a reload reproduces them exactly.
pub fn write_report(path: &Path, rows: &[EvaluationReport]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "{REPORT_HEADER}").map_err(io_err)?;
    for r in rows {
        writeln!(
            w,
            "{}\t{}\t{}\t{:?}\t{:?}\t{:?}",
            r.predictor, r.k, r.correct, r.percent, r.seconds, r.baseline_percent
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reads a report written by [`write_report`].
pub fn read_report(path: &Path) -> Result<Vec<EvaluationReport>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == REPORT_HEADER => {}
        _ => {
            return Err(Error::input(format!(
                "{}: missing report header line",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(Error::input(format!(
                "{}: line {}: expected 6 tab-separated fields, found {}",
                path.display(),
                idx + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| {
            Error::input(format!("{}: line {}: bad {what}", path.display(), idx + 2))
        };
        rows.push(EvaluationReport {
            predictor: fields[0].to_string(),
            k: fields[1].parse().map_err(|_| bad("k"))?,
            correct: fields[2].parse().map_err(|_| bad("correct"))?,
            percent: fields[3].parse().map_err(|_| bad("percent"))?,
            seconds: fields[4].parse().map_err(|_| bad("seconds"))?,
            baseline_percent: fields[5].parse().map_err(|_| bad("baseline_percent"))?,
        });
    }
    Ok(rows)
}

/// Renders rows as an aligned text table for terminal output.
pub fn format_report_table(rows: &[EvaluationReport]) -> String {
    let mut cells: Vec<[String; 6]> = vec![[
        "Predictor".into(),
        "k".into(),
        "Correct".into(),
        "Correct (%)".into(),
        "Time (s)".into(),
        "Baseline (%)".into(),
    ]];
    for r in rows {
        cells.push([
            r.predictor.clone(),
            r.k.to_string(),
            r.correct.to_string(),
            format!("{:.2}", r.percent),
            format!("{:.2}", r.seconds),
            format!("{:.4}", r.baseline_percent),
        ]);
    }
    let widths: Vec<usize> = (0..6)
        .map(|c| cells.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                out.push_str("  ");
            }
            if c == 0 {
                out.push_str(&format!("{:<w$}", cell, w = widths[c]));
            } else {
                out.push_str(&format!("{:>w$}", cell, w = widths[c]));
            }
        }
        // Trailing spaces on the name column would be invisible noise.
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    }
    out
}

/// Writes ranked predictions as TSV rows `rank, u, v, score` using external
/// vertex labels.
pub fn write_predictions(
    path: &Path,
    predictions: &[ScoredPair],
    labels: &[String],
) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "rank\tu\tv\tscore").map_err(io_err)?;
    for (i, p) in predictions.iter().enumerate() {
        writeln!(
            w,
            "{}\t{}\t{}\t{:?}",
            i + 1,
            labels[p.x as usize],
            labels[p.y as usize],
            p.score
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reads a predictions file written by [`write_predictions`], mapping labels
/// back to vertex ids through the instance's label table.
pub fn read_predictions(path: &Path, instance: &LinkPredictionInstance) -> Result<Vec<ScoredPair>> {
    let index = instance.label_index();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if idx == 0 {
            if line != "rank\tu\tv\tscore" {
                return Err(Error::input(format!(
                    "{}: missing predictions header line",
                    path.display()
                )));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::input(format!(
                "{}: line {}: expected 4 tab-separated fields",
                path.display(),
                idx + 1
            )));
        }
        let lookup = |label: &str| {
            index.get(label).copied().ok_or_else(|| {
                Error::input(format!(
                    "{}: line {}: unknown vertex label {label:?}",
                    path.display(),
                    idx + 1
                ))
            })
        };
        let x = lookup(fields[1])?;
        let y = lookup(fields[2])?;
        let score: f64 = fields[3].parse().map_err(|_| {
            Error::input(format!("{}: line {}: bad score", path.display(), idx + 1))
        })?;
        rows.push(ScoredPair::new(x, y, score));
    }
    Ok(rows)
}

/// Least-squares slope of `ln y` against `ln x`: the growth exponent of a
/// supposed power law `y = c x^e` through the measured points.
pub fn fit_log_log_exponent(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points to fit a slope");
    let lx: Vec<f64> = xs.iter().map(|&x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        cov += (x - mx) * (y - my);
        var += (x - mx) * (x - mx);
    }
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{build_instance, EdgeRecord};
    use std::collections::BTreeSet;

    fn rec(u: &str, v: &str) -> EdgeRecord {
        EdgeRecord {
            u: u.to_string(),
            v: v.to_string(),
            timestamp: None,
        }
    }

    /// Path a-b-c-d-e with test links {a-c, b-d, c-e}.
    fn path_instance() -> LinkPredictionInstance {
        let train = vec![rec("a", "b"), rec("b", "c"), rec("c", "d"), rec("d", "e")];
        let test = vec![rec("a", "c"), rec("b", "d"), rec("c", "e")];
        build_instance(&train, &test).unwrap().0
    }

    #[test]
    fn perfect_predictions_score_hundred() {
        let instance = path_instance();
        let preds: Vec<ScoredPair> = instance
            .test_links
            .iter()
            .map(|&(x, y)| ScoredPair::new(x, y, 1.0))
            .collect();
        let r = evaluate("oracle", &preds, &instance, 0.25).unwrap();
        assert_eq!(r.k, 3);
        assert_eq!(r.correct, 3);
        assert!((r.percent - 100.0).abs() < 1e-12);
        assert!((r.seconds - 0.25).abs() < 1e-12);
    }

    #[test]
    fn disjoint_predictions_score_zero() {
        let instance = path_instance();
        // Non-edges of the path that are not test links: a-d, a-e, b-e.
        let preds = vec![
            ScoredPair::new(0, 3, 1.0),
            ScoredPair::new(0, 4, 0.5),
            ScoredPair::new(1, 4, 0.1),
        ];
        let r = evaluate("dud", &preds, &instance, 0.0).unwrap();
        assert_eq!(r.correct, 0);
        assert_eq!(r.percent, 0.0);
    }

    #[test]
    fn evaluate_is_order_insensitive() {
        let instance = path_instance();
        let mut preds = vec![
            ScoredPair::new(0, 2, 0.9),
            ScoredPair::new(0, 3, 0.8),
            ScoredPair::new(1, 3, 0.7),
        ];
        let a = evaluate("p", &preds, &instance, 0.0).unwrap();
        preds.reverse();
        let b = evaluate("p", &preds, &instance, 0.0).unwrap();
        assert_eq!(a.correct, b.correct);
        assert_eq!(a.percent, b.percent);
    }

    #[test]
    fn evaluate_rejects_predictor_bugs() {
        let instance = path_instance();
        let edge = vec![ScoredPair::new(0, 1, 1.0)];
        assert!(evaluate("p", &edge, &instance, 0.0).is_err());
        let dup = vec![ScoredPair::new(0, 2, 1.0), ScoredPair::new(0, 2, 0.9)];
        assert!(evaluate("p", &dup, &instance, 0.0).is_err());
        let out_of_range = vec![ScoredPair::new(0, 9, 1.0)];
        assert!(evaluate("p", &out_of_range, &instance, 0.0).is_err());
    }

    #[test]
    fn empty_prediction_list_scores_zero_without_dividing() {
        let instance = path_instance();
        let r = evaluate("empty", &[], &instance, 0.0).unwrap();
        assert_eq!(r.k, 0);
        assert_eq!(r.percent, 0.0);
    }

    #[test]
    fn baseline_counts_non_edges() {
        // Path on 5 vertices: 10 possible pairs, 4 edges, 6 non-edges,
        // 3 of them test links.
        let instance = path_instance();
        assert!((random_baseline(&instance) - 50.0).abs() < 1e-12);
    }

    #[test]
    fn baseline_matches_hand_arithmetic_at_scale() {
        let pct = random_baseline_from_counts(13_861, 44_619, 11_900);
        assert!((pct - 0.0124).abs() < 5e-4, "{pct}");
    }

    #[test]
    fn baseline_is_hundred_when_every_non_edge_is_held_out() {
        let train = vec![rec("a", "b"), rec("b", "c")];
        let test = vec![rec("a", "c")];
        let (instance, _) = build_instance(&train, &test).unwrap();
        assert!((random_baseline(&instance) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn choose_k_rounds_half_up_with_floor_of_one() {
        let mut instance = path_instance();
        let cases = [(5usize, 1usize), (14, 1), (15, 2), (25, 3), (11_900 / 100, 12)];
        for (t, want) in cases {
            instance.test_links = (0..t as u32).map(|i| (2 * i, 2 * i + 1)).collect();
            assert_eq!(choose_k(&instance, KPolicy::TenPercent), want, "t = {t}");
        }
        instance.test_links = BTreeSet::new();
        assert_eq!(choose_k(&instance, KPolicy::TenPercent), 1);
        assert_eq!(choose_k(&instance, KPolicy::Fixed(1000)), 1000);
    }

    #[test]
    fn report_rows_round_trip_through_tsv() {
        let rows = vec![
            EvaluationReport {
                predictor: "spec_euclid8".into(),
                k: 1190,
                correct: 20,
                percent: 100.0 * 20.0 / 1190.0,
                seconds: 1.5e-3,
                baseline_percent: 0.012394,
            },
            EvaluationReport {
                predictor: "common_neighbors".into(),
                k: 3,
                correct: 0,
                percent: 0.0,
                seconds: 0.0,
                baseline_percent: 50.0,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.tsv");
        write_report(&path, &rows).unwrap();
        assert_eq!(read_report(&path).unwrap(), rows);
    }

    #[test]
    fn report_read_requires_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.tsv");
        std::fs::write(&path, "spec_euclid8\t10\t1\t10.0\t0.1\t0.5\n").unwrap();
        assert!(read_report(&path).is_err());
    }

    #[test]
    fn predictions_round_trip_through_labels() {
        let instance = path_instance();
        let preds = vec![
            ScoredPair::new(0, 2, -0.125),
            ScoredPair::new(1, 3, -0.25),
            ScoredPair::new(0, 4, -1.0 / 3.0),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("predictions.tsv");
        write_predictions(&path, &preds, &instance.labels).unwrap();
        let back = read_predictions(&path, &instance).unwrap();
        assert_eq!(back, preds);
    }

    #[test]
    fn table_formatting_aligns_columns() {
        let rows = vec![EvaluationReport {
            predictor: "katz".into(),
            k: 12,
            correct: 3,
            percent: 25.0,
            seconds: 0.75,
            baseline_percent: 1.0,
        }];
        let table = format_report_table(&rows);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("Predictor"));
        assert!(lines[1].starts_with("katz"));
        assert!(lines[1].contains("25.00"));
    }

    #[test]
    fn log_log_fit_recovers_power_law_exponent() {
        let xs: Vec<f64> = (1..=6).map(|i| (1 << i) as f64 * 1000.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 3.0e-7 * x.powf(1.5)).collect();
        let slope = fit_log_log_exponent(&xs, &ys);
        assert!((slope - 1.5).abs() < 1e-9, "{slope}");
    }
}
