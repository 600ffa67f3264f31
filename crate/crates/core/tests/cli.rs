use std::fs;
use std::path::Path;

use serde_json::Value;

use csp_glass::cli::main_with_args;

fn run(args: &[&str], out: &Path) -> i32 {
    let mut full = vec!["csp-glass".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.extend(["--out".to_string(), out.display().to_string()]);
    main_with_args(full)
}

fn run_json(args: &[&str], out: &Path) -> (i32, Value) {
    let mut with_format = args.to_vec();
    with_format.extend(["--format", "json"]);
    let code = run(&with_format, out);
    let doc = fs::read_to_string(out).map(|t| serde_json::from_str(&t).unwrap()).unwrap_or(Value::Null);
    (code, doc)
}

fn row<'a>(doc: &'a Value, quantity: &str, degree: u64) -> Option<&'a Value> {
    doc["rows"]
        .as_array()?
        .iter()
        .find(|r| r["quantity"] == quantity && r["degree"] == degree)
        .map(|r| &r["value"])
}

#[test]
fn spectrum_of_two_xor() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_json(&["spectrum", "--family", "kXOR", "--k", "2"], &dir.path().join("s.json"));
    assert_eq!(code, 0);
    assert_eq!(row(&doc, "mean_term", 0).unwrap(), 0.5);
    assert_eq!(row(&doc, "xi_coefficient", 2).unwrap(), 0.25);
    assert!(row(&doc, "xi_coefficient", 1).is_none());
    assert_eq!(doc["manifest"]["subcommand"], "spectrum");
}

#[test]
fn spectrum_of_three_sat() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_json(&["spectrum", "--family", "kSAT", "--k", "3"], &dir.path().join("s.json"));
    assert_eq!(code, 0);
    assert_eq!(row(&doc, "mean_term", 0).unwrap(), 0.875);
    assert_eq!(row(&doc, "xi_coefficient", 1).unwrap(), 3.0 / 64.0);
    assert_eq!(row(&doc, "xi_coefficient", 2).unwrap(), 3.0 / 64.0);
    assert_eq!(row(&doc, "xi_coefficient", 3).unwrap(), 1.0 / 64.0);
    assert_eq!(doc["manifest"]["diagnostics"]["mean_term"], "7/8");
}

#[test]
fn csv_output_has_a_side_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    assert_eq!(run(&["spectrum", "--family", "kNAE", "--k", "3", "--seed", "9"], &out), 0);
    let body = fs::read_to_string(&out).unwrap();
    assert!(body.starts_with("quantity,degree,value\n"));
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["parameters"]["family"], "kNAE");
}

#[test]
fn predicate_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("or2.json");
    fs::write(&good, r#"{"arity": 2, "table": [0, 1, 1, 1]}"#).unwrap();
    let (code, doc) = run_json(&["spectrum", "--table", good.to_str().unwrap()], &dir.path().join("a.json"));
    assert_eq!(code, 0);
    assert_eq!(row(&doc, "mean_term", 0).unwrap(), 0.75);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"arity": 2, "table": [0, 1, 1]}"#).unwrap();
    let out = dir.path().join("b.json");
    assert_eq!(run(&["spectrum", "--table", bad.to_str().unwrap()], &out), 2);
    assert!(!out.exists());
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    assert_eq!(run(&["spectrum", "--bogus"], &out), 2);
    assert_eq!(run(&["spectrum", "--family", "kMAJ"], &out), 2);
    assert_eq!(run(&["vmax", "--n", "40", "--reps", "1", "--atoms", "1"], &out), 3);
}

#[test]
fn table_rows_share_the_two_ary_value() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_json(
        &["table1", "--family", "oneInK,kNAE,kXOR", "--k", "2", "--atoms", "2"],
        &dir.path().join("t.json"),
    );
    assert_eq!(code, 0);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let gsed = rows[0]["gsed"].as_f64().unwrap();
    assert!((gsed - 0.54).abs() <= 0.01);
    assert!(rows.iter().all(|r| r["gsed"].as_f64() == Some(gsed) && r["mean_term_fraction"] == "1/2"));
}

#[test]
fn table_row_for_four_nae() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_json(
        &["table1", "--family", "kNAE", "--k", "4", "--atoms", "4"],
        &dir.path().join("t.json"),
    );
    assert_eq!(code, 0);
    let r = &doc["rows"][0];
    assert_eq!(r["mean_term"], 0.875);
    assert_eq!(r["mean_term_fraction"], "7/8");
    assert!((r["gsed"].as_f64().unwrap() - 0.37).abs() <= 0.01);
}

#[test]
fn failing_cells_are_isolated() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_json(
        &["vmax", "--n", "8", "--alpha", "0.05,4", "--reps", "3", "--atoms", "1"],
        &dir.path().join("v.json"),
    );
    assert_eq!(code, 2);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_ne!(rows[0]["status"], "ok");
    assert_eq!(rows[1]["status"], "ok");
    assert!(rows[1]["predicted"].as_f64().is_some());
}

#[test]
fn correlation_curve_ends_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_json(
        &["chi", "--n", "16", "--alpha", "4", "--t", "0,1", "--reps", "8", "--sweeps", "20"],
        &dir.path().join("c.json"),
    );
    assert_eq!(code, 0);
    assert_eq!(doc["rows"][1]["chi"], 1.0);
}

#[test]
fn interpolation_and_overlap_scan_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (code, doc) = run_json(
        &["interpolate", "--n", "8", "--alpha", "4,16", "--reps", "4"],
        &dir.path().join("i.json"),
    );
    assert_eq!(code, 0);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
    let (code, doc) = run_json(
        &["ogp", "--n", "8", "--thresholds", "1", "--bins", "4", "--mode", "plain"],
        &dir.path().join("o.json"),
    );
    assert_eq!(code, 0);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[3]["count"].as_u64().unwrap() > 0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["vmax", "--n", "10", "--alpha", "4", "--reps", "4", "--mode", "poisson", "--atoms", "1", "--seed", "3"];
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(run(&args, &a), 0);
    assert_eq!(run(&args, &b), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let mut other = args.to_vec();
    *other.last_mut().unwrap() = "4";
    let c = dir.path().join("c.csv");
    assert_eq!(run(&other, &c), 0);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}
