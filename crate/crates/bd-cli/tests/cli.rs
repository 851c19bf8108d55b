//! End-to-end behavior of the `bd` binary: exit codes, report shapes,
//! precedence rules, and the worked examples the interface promises.

use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn bd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bd"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout_str(out)).expect("stdout is JSON")
}

fn temp_file(content: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(content.as_bytes()).unwrap();
    f
}

// ---- validate -------------------------------------------------------------

#[test]
fn validate_demo_parameters_pass_with_alpha_near_two_thirds() {
    let out = bd(&["validate"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
    let doc = json(&out);
    assert_eq!(doc["verdict"], Value::Bool(true));
    let alpha = doc["alpha"].as_f64().unwrap();
    assert!((alpha - 2.0 / 3.0).abs() < 1e-3, "alpha = {alpha}");
    assert!(doc["residual"].as_f64().unwrap() <= 1e-12);
    // all three conditions hold
    for cond in doc["conditions"].as_array().unwrap() {
        assert_eq!(cond["holds"], Value::Bool(true));
    }
}

#[test]
fn validate_condition_two_infeasible_exits_one() {
    let out = bd(&["validate", "--a", "0.8", "--b", "0.6"]);
    assert_eq!(code(&out), 1);
    let doc = json(&out);
    assert_eq!(doc["verdict"], Value::Bool(false));
    let conds = doc["conditions"].as_array().unwrap();
    assert_eq!(conds[1]["id"], 2);
    assert_eq!(conds[1]["holds"], Value::Bool(false));
    // b >= 1/2 makes condition (2) unsatisfiable for every lambda
    assert_eq!(doc["min_lambda"], Value::Null);
    // the exponent equation still solves: 0.64 + 0.36 = 1 at p = 2
    assert!((doc["alpha"].as_f64().unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn validate_malformed_number_exits_two() {
    let out = bd(&["validate", "--a", "abc"]);
    assert_eq!(code(&out), 2);
    assert!(stderr_str(&out).contains("--a"));

    let out = bd(&["validate", "--b", "1/0"]);
    assert_eq!(code(&out), 2);

    let out = bd(&["validate", "--a", "-0.5"]);
    assert_eq!(code(&out), 2, "non-positive a is rejected as input");
}

#[test]
fn validate_csv_lists_key_value_rows() {
    let out = bd(&["validate", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout_str(&out);
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("verdict,true\n"));
    assert!(text.contains("condition_2,true\n"));
}

#[test]
fn validate_exact_mode_prints_exact_rationals() {
    let out = bd(&["validate", "--mode", "exact"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["params"]["a"], Value::String("97/100".into()));
    // min lambda = a / (1 - 2b) = (97/100) / (1761/15625), reduced
    assert_eq!(doc["min_lambda"], Value::String("60625/7044".into()));
    assert_eq!(doc["params"]["mode"], Value::String("exact-rational".into()));
}

// ---- build ----------------------------------------------------------------

#[test]
fn build_reports_dimension_sequence_and_tuple_counts() {
    let out = bd(&["build", "--stages", "6"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let dims: Vec<u64> = doc["dims"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(dims, vec![1, 1, 5, 45, 1305, 272745]);
    let counts: Vec<u64> = doc["gamma_counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(counts, vec![0, 4, 40, 1260, 271440]);
}

#[test]
fn build_paper_strict_degenerates_with_warning() {
    let out = bd(&["build", "--convention", "paper-strict", "--stages", "6"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let dims: Vec<u64> = doc["dims"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(dims, vec![1; 6]);
    assert!(!doc["warnings"].as_array().unwrap().is_empty());
    assert!(stderr_str(&out).contains("degenerate"));
}

#[test]
fn build_beyond_cap_exits_three() {
    let out = bd(&["build", "--stages", "7"]);
    assert_eq!(code(&out), 3);
    assert!(stderr_str(&out).contains("cap"));

    let out = bd(&["build", "--stages", "4", "--cap", "10"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn build_csv_has_one_row_per_stage() {
    let out = bd(&["build", "--stages", "3", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_str(&out), "stage,dim,gamma_count\n1,1,0\n2,1,4\n3,5,\n");
}

#[test]
fn build_infeasible_parameters_exit_one() {
    let out = bd(&["build", "--a", "0.8", "--b", "0.6"]);
    assert_eq!(code(&out), 1);
    assert!(stderr_str(&out).contains("infeasible"));
}

// ---- grow -----------------------------------------------------------------

#[test]
fn grow_l2_orthonormal_recovers_square_root_growth() {
    let out = bd(&["grow", "--candidate", "l2", "--count", "16"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let exponent = doc["fit"]["exponent"].as_f64().unwrap();
    assert!((exponent - 0.5).abs() <= 1e-10, "exponent = {exponent}");
    let norms = doc["norms"].as_array().unwrap();
    assert_eq!(norms[3].as_f64().unwrap(), 2.0);
    assert_eq!(norms.len(), 16);
}

#[test]
fn grow_single_block_is_refused() {
    let out = bd(&["grow", "--count", "1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr_str(&out).contains("at least 3"));

    let out = bd(&["grow", "--candidate", "l2", "--count", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn grow_bd_prints_fit_and_alpha_side_by_side() {
    let out = bd(&["grow"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert!(doc["fit"]["exponent"].is_number());
    let alpha = doc["alpha"]["alpha"].as_f64().unwrap();
    assert!((alpha - 2.0 / 3.0).abs() < 1e-3);
    assert!(doc["comparison"]["difference"].is_number());
    assert_eq!(doc["count"].as_u64().unwrap(), 3, "stages 5 carry three growth stages");
}

#[test]
fn grow_exact_mode_reports_exact_norms() {
    let out = bd(&[
        "grow",
        "--candidate",
        "l2",
        "--count",
        "4",
        "--mode",
        "exact",
    ]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let sq: Vec<&str> = doc["partial_sum_sq_exact"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(sq, vec!["1", "2", "3", "4"]);
}

#[test]
fn grow_csv_is_n_norm_table() {
    let out = bd(&["grow", "--candidate", "l2", "--count", "4", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout_str(&out);
    assert!(text.starts_with("n,norm\n1,1\n"), "got: {text}");
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn grow_bad_candidate_or_widths_exit_two() {
    let out = bd(&["grow", "--candidate", "l3"]);
    assert_eq!(code(&out), 2);

    let out = bd(&["grow", "--candidate", "l2", "--widths", "0,2"]);
    assert_eq!(code(&out), 2);

    let out = bd(&["grow", "--candidate", "l2", "--widths", "x"]);
    assert_eq!(code(&out), 2);
}

// ---- probe ----------------------------------------------------------------

#[test]
fn probe_zero_matrix_reports_zero_norms_and_no_witness() {
    let f = temp_file("0,0,0\n0,0,0\n0,0,0\n0,0,0\n0,0,0\n");
    let out = bd(&["probe", "--operator", f.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["norm"]["lower"].as_f64().unwrap(), 0.0);
    assert_eq!(doc["norm"]["upper"].as_f64().unwrap(), 0.0);
    assert_eq!(doc["witness"], Value::Null);
    assert_eq!(doc["defect"]["numerically_compact"], Value::Bool(true));
}

#[test]
fn probe_geometric_row_matches_the_series_formula() {
    // single row r_j = 2^-(j-1): the tail norm past k is
    // sqrt(sum_{j>k} 4^-(j-1)) -> 2^-k * 2/sqrt(3) as the column count grows
    let row: Vec<String> = (0..20).map(|j| format!("1/{}", 1u64 << j)).collect();
    let f = temp_file(&(row.join(",") + "\n"));
    let out = bd(&["probe", "--operator", f.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let values = doc["defect"]["values"].as_array().unwrap();
    for k in 0..=8usize {
        let expect = 2f64.powi(-(k as i32)) * 2.0 / 3f64.sqrt();
        let got = values[k].as_f64().unwrap();
        assert!(
            (got - expect).abs() < 1e-9,
            "delta_{k} = {got}, series limit {expect}"
        );
    }
}

#[test]
fn probe_witness_respects_delta_and_beyond() {
    let f = temp_file("1/2,1/3\n");
    let path = f.path().to_str().unwrap();

    // achievable ratio is sqrt(13)/6 ~ 0.6009 on full support
    let out = bd(&["probe", "--operator", path, "--delta", "0.4"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let achieved = doc["witness"]["achieved"].as_f64().unwrap();
    assert!(achieved > 0.4 && (achieved - (13f64).sqrt() / 6.0).abs() < 1e-9);

    let out = bd(&["probe", "--operator", path, "--delta", "0.7"]);
    assert_eq!(json(&out)["witness"], Value::Null);

    // restricted past column 1 only the 1/3 entry remains
    let out = bd(&[
        "probe", "--operator", path, "--delta", "0.2", "--beyond", "1",
    ]);
    let doc = json(&out);
    let w = &doc["witness"];
    assert_eq!(w["window"][0].as_u64().unwrap(), 1);
    let achieved = w["achieved"].as_f64().unwrap();
    assert!((achieved - 1.0 / 3.0).abs() < 1e-9, "achieved = {achieved}");
}

#[test]
fn probe_contradiction_uses_unit_constants_by_default() {
    // operator norm exactly 2 through the first coordinate; alpha = 2/3
    // turns the bound into (2)^(1/(2/3-1/2)) = 2^6 = 64
    let f = temp_file("2\n");
    let out = bd(&[
        "probe",
        "--operator",
        f.path().to_str().unwrap(),
        "--alpha",
        "0.6666666666666666",
    ]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["contradiction"]["c1"].as_f64().unwrap(), 1.0);
    assert_eq!(doc["contradiction"]["c2"].as_f64().unwrap(), 1.0);
    assert_eq!(doc["contradiction"]["bound"].as_u64().unwrap(), 64);
    assert_eq!(doc["norm"]["lower"].as_f64().unwrap(), 2.0);
}

#[test]
fn probe_reads_json_operators() {
    let f = temp_file(r#"{"rows": [[1, "1/2"]]}"#);
    let out = bd(&["probe", "--operator", f.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let lower = doc["norm"]["lower"].as_f64().unwrap();
    assert!((lower - (1.25f64).sqrt()).abs() < 1e-12);
}

#[test]
fn probe_shape_errors_exit_two() {
    // no stage has dimension 7
    let f = temp_file("1\n1\n1\n1\n1\n1\n1\n");
    let out = bd(&["probe", "--operator", f.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr_str(&out).contains("dimension 7"));

    // ragged rows
    let f = temp_file("1,2\n3\n4,5\n6,7\n8,9\n");
    let out = bd(&["probe", "--operator", f.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    // row count does not match the forced stage
    let f = temp_file("1,2\n3,4\n5,6\n7,8\n9,10\n");
    let out = bd(&[
        "probe",
        "--operator",
        f.path().to_str().unwrap(),
        "--target-stage",
        "2",
    ]);
    assert_eq!(code(&out), 2);

    // extension below target or above the built top
    let f = temp_file("1\n");
    let out = bd(&[
        "probe",
        "--operator",
        f.path().to_str().unwrap(),
        "--target-stage",
        "2",
        "--extension-stage",
        "1",
    ]);
    assert_eq!(code(&out), 2);
    let out = bd(&[
        "probe",
        "--operator",
        f.path().to_str().unwrap(),
        "--extension-stage",
        "9",
    ]);
    assert_eq!(code(&out), 2);

    // missing file
    let out = bd(&["probe", "--operator", "/nonexistent/op.csv"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn probe_exact_mode_carries_exact_squares() {
    let f = temp_file("1/2,1/3\n");
    let out = bd(&[
        "probe",
        "--operator",
        f.path().to_str().unwrap(),
        "--mode",
        "exact",
        "--target-stage",
        "1",
        "--extension-stage",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["norm"]["lower_sq_exact"], Value::String("13/36".into()));
    let sq: Vec<&str> = doc["defect"]["values_sq_exact"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(sq, vec!["13/36", "1/9", "0"]);
}

// ---- configuration plumbing ------------------------------------------------

#[test]
fn flags_override_config_file_which_overrides_defaults() {
    let conf = temp_file("a=0.9\nb=0.3\nstages=4\n");
    let out = bd(&[
        "validate",
        "--config",
        conf.path().to_str().unwrap(),
        "--b",
        "0.35",
    ]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["params"]["a"].as_f64().unwrap(), 0.9);
    assert_eq!(doc["params"]["b"].as_f64().unwrap(), 0.35);
    assert_eq!(doc["params"]["stages"].as_u64().unwrap(), 4);
    // lambda untouched by either layer: demo default
    assert_eq!(doc["params"]["lambda"].as_f64().unwrap(), 8.61);
}

#[test]
fn unknown_config_key_exits_two() {
    let conf = temp_file("alpha=0.6\n");
    let out = bd(&["validate", "--config", conf.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr_str(&out).contains("unknown config key"));
}

#[test]
fn out_file_receives_the_exact_report_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = bd(&["build", "--stages", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, out.stdout);
}

#[test]
fn help_and_bad_flags_follow_usage_conventions() {
    let out = bd(&["--help"]);
    assert_eq!(code(&out), 0);

    let out = bd(&["validate", "--format", "xml"]);
    assert_eq!(code(&out), 2);

    let out = bd(&["validate", "--mode", "decimal"]);
    assert_eq!(code(&out), 2);

    let out = bd(&["build", "--stages", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn pq_and_decimal_spellings_agree() {
    let a = bd(&["validate", "--a", "97/100", "--b", "443648/1000000"]);
    let b = bd(&["validate", "--a", "0.97", "--b", "0.443648"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(code(&a), 0);
}
