use std::process::Command;

use cascade_index::data::{synthetic_proteome, write_fasta};

fn bench(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cascade-bench"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let r = rows(csv);
    let i = r[0].iter().position(|h| h == name).unwrap();
    r[1..].iter().map(|row| row[i].clone()).collect()
}

#[test]
fn range_verify_and_shape() {
    let (code, out, err) = bench(&[
        "range", "--n", "800", "--dim", "3", "--radii", "0,0.1,0.3,5", "--queries", "15", "--verify",
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(rows(&out).len(), 1 + 3 * 4);
    assert_eq!(column(&out, "cascade"), ["0", "0", "0", "0", "1", "1", "1", "1", "inf", "inf", "inf", "inf"]);
    // Off-dataset queries have no exact duplicates.
    let sizes = column(&out, "mean_result_size");
    assert_eq!(sizes[0], "0");
    // A radius of five diameters covers everything with one call.
    let calls = column(&out, "mean_distance_calls");
    for i in [3, 7, 11] {
        assert_eq!(calls[i], "1");
        assert_eq!(column(&out, "mean_result_fraction")[i], "1");
    }
}

#[test]
fn csv_is_reproducible() {
    let args = ["knn", "--n", "600", "--k", "1,7", "--bound-pct", "5,40", "--queries", "12", "--seed", "3"];
    let (_, a, _) = bench(&args);
    let (_, b, _) = bench(&args);
    assert_eq!(a, b);
    assert_eq!(rows(&a).len(), 1 + 3 * 2 * 2);
    let (_, c, _) = bench(&["knn", "--n", "600", "--k", "1,7", "--bound-pct", "5,40", "--queries", "12", "--seed", "4"]);
    assert_ne!(a, c);
}

#[test]
fn knn_with_k_equal_n_evaluates_everything() {
    let (code, out, err) = bench(&["knn", "--n", "200", "--k", "200", "--queries", "5", "--verify"]);
    assert_eq!(code, 0, "{err}");
    assert!(column(&out, "mean_distance_calls").iter().all(|c| c == "200"));
    assert!(column(&out, "mean_result_fraction").iter().all(|c| c == "1"));
}

#[test]
fn optimality_rows() {
    let (code, out, err) = bench(&["optimality", "--n", "500", "--k", "1,500", "--queries", "8", "--verify"]);
    assert_eq!(code, 0, "{err}");
    let ratios = column(&out, "mean_optimality_ratio");
    assert_eq!(ratios.len(), 6);
    assert_eq!(ratios[1], "1");
    assert_eq!(ratios[5], "1");
}

#[test]
fn build_then_query_saved_tree() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("t.cmt");
    let tree_s = tree.to_str().unwrap();
    let report = dir.path().join("build.csv");
    let (code, _, err) = bench(&[
        "build", "--n", "1024", "--cascade", "inf", "--tree", tree_s, "--out", report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let report = std::fs::read_to_string(report).unwrap();
    assert_eq!(column(&report, "height"), ["10"]);
    assert_eq!(column(&report, "n"), ["1024"]);

    let (code, out, err) = bench(&["range", "--n", "1024", "--tree", tree_s, "--radii", "0.1", "--queries", "5", "--verify"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(column(&out, "cascade"), ["inf"]);

    // The tree must match the dataset it is queried against.
    let (code, _, err) = bench(&["range", "--n", "1000", "--tree", tree_s, "--queries", "5"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn build_calls_match_across_cascades() {
    let (code, out, _) = bench(&["build", "--n", "1024"]);
    assert_eq!(code, 0);
    let calls = column(&out, "build_distance_calls");
    assert_eq!(calls.len(), 3);
    assert!(calls.iter().all(|c| c == &calls[0]));
    let (_, again, _) = bench(&["build", "--n", "1024"]);
    assert_eq!(out, again);
}

#[test]
fn fasta_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.fasta");
    write_fasta(std::fs::File::create(&path).unwrap(), &synthetic_proteome(150, 1)).unwrap();
    let p = path.to_str().unwrap();
    let (code, out, err) = bench(&[
        "knn", "--dataset", "fasta", "--path", p, "--k", "3", "--bound-pct", "2", "--queries", "4", "--verify",
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(column(&out, "dataset"), ["fasta", "fasta", "fasta"]);
    assert_eq!(column(&out, "n"), ["150"; 3]);
    let (code, out, _) = bench(&["range", "--dataset", "fasta", "--path", p, "--cap", "40", "--radii", "0.1", "--queries", "3", "--verify"]);
    assert_eq!(code, 0);
    assert_eq!(column(&out, "n"), ["40"; 3]);
}

#[test]
fn data_dir_supplies_default_fasta() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("uniprot_sprot.fasta");
    write_fasta(std::fs::File::create(&path).unwrap(), &synthetic_proteome(60, 2)).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cascade-bench"))
        .args(["build", "--dataset", "fasta", "--cascade", "1"])
        .env("CASCADE_INDEX_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(column(&String::from_utf8(out.stdout).unwrap(), "n"), ["60"]);
}

#[test]
fn exit_codes() {
    assert_eq!(bench(&["range", "--radii", "-1", "--n", "10"]).0, 2);
    assert_eq!(bench(&["knn", "--k", "0", "--n", "10"]).0, 2);
    assert_eq!(bench(&["range", "--cascade", "sideways"]).0, 2);
    assert_eq!(bench(&["frobnicate"]).0, 2);
    assert_eq!(bench(&["range", "--dataset", "fasta", "--path", "/nonexistent/x.fasta"]).0, 3);
    let (code, _, err) = bench(&["range", "--n", "10", "--queries", "1", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(code, 3);
    assert!(err.contains("/nonexistent/dir/out.csv"), "{err}");
    assert_eq!(bench(&["--help"]).0, 0);
}

#[test]
fn timing_column_is_opt_in() {
    let (_, plain, _) = bench(&["range", "--n", "100", "--radii", "0.2", "--queries", "2", "--cascade", "0"]);
    assert!(!plain.lines().next().unwrap().contains("wall"));
    let (_, timed, _) = bench(&["range", "--n", "100", "--radii", "0.2", "--queries", "2", "--cascade", "0", "--timing"]);
    assert!(timed.lines().next().unwrap().ends_with("mean_wall_ms"));
}

#[test]
fn verify_reports_a_damaged_tree() {
    use cascade_index::data::gen_uniform_points;
    use cascade_index::{BuildConfig, CmtTree, DistanceInterval, Euclidean};

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cmt");
    let mut tree = CmtTree::build(gen_uniform_points(300, 3, 0), Euclidean, BuildConfig::default()).unwrap();
    // Claims everything below the root is far away, so searches prune it.
    tree.corrupt_interval(0, 0, DistanceInterval::new(10.0, 11.0));
    tree.save(&path).unwrap();
    let (code, _, err) = bench(&[
        "range", "--n", "300", "--tree", path.to_str().unwrap(), "--radii", "0.3", "--queries", "3", "--verify",
    ]);
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("range mismatch for query 0"), "{err}");
}
