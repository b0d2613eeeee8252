//! End-to-end runs of the compiled binary: ingest, predict, evaluate, bench,
//! exit codes, and file formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linkpred"))
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary should launch")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "expected success\nstdout: {}\nstderr: {}",
        stdout(out),
        stderr(out)
    );
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

/// Path a-b-c-d-e (timestamps 1..4) plus later links a-c, b-d, c-e
/// (timestamps 10..12): cutoff 5 splits them apart.
fn write_timestamped_edges(dir: &Path) -> PathBuf {
    let path = dir.join("edges.txt");
    std::fs::write(
        &path,
        "# comment line\n\
         a b 1\n\
         b c 2\n\
         c d 3\n\
         d e 4\n\
         a c 10\n\
         b d 11\n\
         c e 12\n",
    )
    .unwrap();
    path
}

fn ingest_path_instance(dir: &Path) -> PathBuf {
    let edges = write_timestamped_edges(dir);
    let instance = dir.join("instance");
    let out = run(&[
        "ingest",
        "--input",
        edges.to_str().unwrap(),
        "--ts-col",
        "2",
        "--cutoff",
        "5",
        "--out",
        instance.to_str().unwrap(),
    ]);
    assert_success(&out);
    instance
}

#[test]
fn ingest_writes_instance_and_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let instance = ingest_path_instance(dir.path());
    for file in ["labels.tsv", "train.edges", "test.links", "manifest.json"] {
        assert!(instance.join(file).exists(), "{file} missing");
    }
    let labels = std::fs::read_to_string(instance.join("labels.tsv")).unwrap();
    assert_eq!(labels, "a\nb\nc\nd\ne\n");
    let manifest = std::fs::read_to_string(instance.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"cutoff\": 5"));
}

#[test]
fn ingest_reports_counts_in_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write_timestamped_edges(dir.path());
    let out = run(&[
        "ingest",
        "--input",
        edges.to_str().unwrap(),
        "--ts-col",
        "2",
        "--cutoff",
        "5",
        "--out",
        dir.path().join("inst").to_str().unwrap(),
    ]);
    assert_success(&out);
    let text = stdout(&out);
    assert!(text.contains("5 vertices, 4 edges"), "{text}");
    assert!(text.contains("3 kept of 3"), "{text}");
}

#[test]
fn ingest_requires_exactly_one_split_mode() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write_timestamped_edges(dir.path());
    let out = run(&[
        "ingest",
        "--input",
        edges.to_str().unwrap(),
        "--ts-col",
        "2",
        "--cutoff",
        "5",
        "--train-fraction",
        "0.5",
        "--out",
        dir.path().join("inst").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("exactly one split"));
}

#[test]
fn missing_input_exits_two_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "ingest",
        "--input",
        "/nonexistent/edges.txt",
        "--cutoff",
        "5",
        "--out",
        dir.path().join("inst").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("/nonexistent/edges.txt"));
}

#[test]
fn two_snapshot_ingest_uses_late_pairs_as_test_links() {
    let dir = tempfile::tempdir().unwrap();
    let early = dir.path().join("early.txt");
    let late = dir.path().join("late.txt");
    std::fs::write(&early, "a b\nb c\nc d\n").unwrap();
    std::fs::write(&late, "a b\na c\nb d\n").unwrap();
    let instance = dir.path().join("instance");
    let out = run(&[
        "ingest",
        "--input",
        early.to_str().unwrap(),
        "--test-input",
        late.to_str().unwrap(),
        "--out",
        instance.to_str().unwrap(),
    ]);
    assert_success(&out);
    // a-b already known; a-c and b-d are the new links.
    let links = std::fs::read_to_string(instance.join("test.links")).unwrap();
    assert_eq!(links.lines().count(), 2);
}

#[test]
fn predict_writes_ranked_predictions_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let instance = ingest_path_instance(dir.path());
    let out = run(&[
        "predict",
        "--instance",
        instance.to_str().unwrap(),
        "--predictor",
        "common_neighbors",
        "--k",
        "3",
    ]);
    assert_success(&out);
    let pred_path = instance.join("predictions_common_neighbors.tsv");
    let text = std::fs::read_to_string(&pred_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rank\tu\tv\tscore");
    assert_eq!(lines.len(), 4);
    // On the path, every distance-2 pair has exactly one common neighbor;
    // lexicographic order decides: a-c, b-d, c-e.
    assert!(lines[1].starts_with("1\ta\tc\t"));
    assert!(lines[2].starts_with("2\tb\td\t"));
    assert!(lines[3].starts_with("3\tc\te\t"));
    let meta = std::fs::read_to_string(instance.join("predictions_common_neighbors.meta.json"))
        .unwrap();
    assert!(meta.contains("\"predictor\": \"common_neighbors\""));
    assert!(meta.contains("\"k_requested\": 3"));
}

#[test]
fn predict_defaults_k_to_ten_percent_of_test_links() {
    let dir = tempfile::tempdir().unwrap();
    let instance = ingest_path_instance(dir.path());
    // 3 test links -> k = max(1, round(0.3)) = 1.
    let out = run(&[
        "predict",
        "--instance",
        instance.to_str().unwrap(),
        "--predictor",
        "cn",
    ]);
    assert_success(&out);
    let text =
        std::fs::read_to_string(instance.join("predictions_common_neighbors.tsv")).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn predict_spectral_by_score_flag_and_emit_embedding() {
    let dir = tempfile::tempdir().unwrap();
    let instance = ingest_path_instance(dir.path());
    let emb_path = dir.path().join("embedding.txt");
    let out = run(&[
        "predict",
        "--instance",
        instance.to_str().unwrap(),
        "--score",
        "euclid",
        "--dim",
        "2",
        "--k",
        "3",
        "--emit-embedding",
        emb_path.to_str().unwrap(),
    ]);
    assert_success(&out);
    assert!(instance.join("predictions_spec_euclid2.tsv").exists());
    let emb = linkpred::spectral::io::read_text(&emb_path).unwrap();
    assert_eq!(emb.vertex_count(), 5);
    assert_eq!(emb.dim(), 2);
}

#[test]
fn unknown_predictor_exits_two_listing_names() {
    let dir = tempfile::tempdir().unwrap();
    let instance = ingest_path_instance(dir.path());
    let out = run(&[
        "predict",
        "--instance",
        instance.to_str().unwrap(),
        "--predictor",
        "random_walk",
        "--k",
        "1",
    ]);
    assert_eq!(exit_code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("unknown predictor"), "{err}");
    assert!(err.contains("spec_euclid"), "{err}");
}

#[test]
fn dense_guard_violation_exits_one_naming_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let instance = ingest_path_instance(dir.path());
    let out = run(&[
        "predict",
        "--instance",
        instance.to_str().unwrap(),
        "--predictor",
        "katz",
        "--k",
        "1",
        "--dense-guard",
        "3",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("dense-guard"));
}

#[test]
fn evaluate_runs_predictors_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let instance = ingest_path_instance(dir.path());
    let out = run(&[
        "evaluate",
        "--instance",
        instance.to_str().unwrap(),
        "--predictor",
        "common_neighbors",
        "--predictor",
        "pref_attach",
        "--k",
        "3",
    ]);
    assert_success(&out);
    let text = stdout(&out);
    assert!(text.contains("Predictor"), "{text}");
    assert!(text.contains("common_neighbors"), "{text}");
    assert!(text.contains("pref_attach"), "{text}");
    let report = std::fs::read_to_string(instance.join("report.tsv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(
        lines[0],
        "predictor\tk\tcorrect\tpercent\tseconds\tbaseline_percent"
    );
    assert_eq!(lines.len(), 3);
    // All three distance-2 pairs are the held-out links: 100% for
    // common_neighbors on the path.
    let cn: Vec<&str> = lines[1].split('\t').collect();
    assert_eq!(cn[0], "common_neighbors");
    assert_eq!(cn[1], "3");
    assert_eq!(cn[2], "3");
    assert_eq!(cn[3], "100.0");
    // 5 vertices: 10 pairs, 4 train edges, 6 non-edges, 3 held out.
    assert_eq!(cn[5], "50.0");
}

#[test]
fn evaluate_scores_prediction_files_through_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let instance = ingest_path_instance(dir.path());
    let out = run(&[
        "predict",
        "--instance",
        instance.to_str().unwrap(),
        "--predictor",
        "adamic_adar",
        "--k",
        "3",
    ]);
    assert_success(&out);
    let pred_path = instance.join("predictions_adamic_adar.tsv");
    let out = run(&[
        "evaluate",
        "--instance",
        instance.to_str().unwrap(),
        "--predictions",
        pred_path.to_str().unwrap(),
    ]);
    assert_success(&out);
    let report = std::fs::read_to_string(instance.join("report.tsv")).unwrap();
    assert!(report.contains("adamic_adar"), "{report}");
}

#[test]
fn evaluate_without_work_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let instance = ingest_path_instance(dir.path());
    let out = run(&["evaluate", "--instance", instance.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("nothing to evaluate"));
}

#[test]
fn bench_prints_per_size_rows_and_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bench.tsv");
    let out = run(&[
        "bench",
        "--start-vertices",
        "128",
        "--doublings",
        "1",
        "--edges-per-vertex",
        "3",
        "--dim",
        "2",
        "--k",
        "20",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_success(&out);
    let text = stdout(&out);
    assert!(text.contains("vertices\tedges"), "{text}");
    assert!(text.contains("search stage"), "{text}");
    let table = std::fs::read_to_string(&out_path).unwrap();
    assert!(table.lines().count() >= 4, "{table}");
    assert!(table.contains("128\t"), "{table}");
    assert!(table.contains("256\t"), "{table}");
}

#[test]
fn fraction_split_round_trips_through_predict() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("plain.txt");
    // No timestamps: file order decides the fraction split.
    std::fs::write(&edges, "a b\nb c\nc d\nd e\ne a\na c\nb d\n").unwrap();
    let instance = dir.path().join("inst");
    let out = run(&[
        "ingest",
        "--input",
        edges.to_str().unwrap(),
        "--train-fraction",
        "0.7",
        "--out",
        instance.to_str().unwrap(),
    ]);
    assert_success(&out);
    let out = run(&[
        "predict",
        "--instance",
        instance.to_str().unwrap(),
        "--predictor",
        "jaccard",
        "--k",
        "2",
    ]);
    assert_success(&out);
}
