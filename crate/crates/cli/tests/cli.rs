use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    root.to_str().unwrap().to_string()
}

fn cuspcert(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cuspcert"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn temp_json(body: &str) -> tempfile::NamedTempFile {
    let f = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    std::fs::write(f.path(), body).unwrap();
    f
}

fn result(stdout: &str) -> Value {
    let v: Value = serde_json::from_str(stdout).expect("json report");
    assert_eq!(v["tool"], "cuspcert");
    v["result"].clone()
}

#[test]
fn keep_cusp_one_is_anomalous() {
    let (code, out, _) = cuspcert(&["check-subgroup", "--input", &data("two_cusp.json"), "--subgroup", &data("keep_cusp_1.json")]);
    assert_eq!(code, 0);
    let r = result(&out)["report"].clone();
    assert_eq!(r["anomalous"], true);
    assert_eq!(r["complete_cusps"], serde_json::json!([1]));
    assert_eq!(r["counterexample"], false);
}

#[test]
fn diagonal_is_not_anomalous() {
    let (code, out, _) = cuspcert(&["check-subgroup", "--input", &data("two_cusp.json"), "--subgroup", &data("diagonal.json")]);
    assert_eq!(code, 0);
    let r = result(&out)["report"].clone();
    assert_eq!(r["anomalous"], false);
    assert_eq!(r["jacobian_rank"], 2);
}

#[test]
fn text_format_is_one_line() {
    let (code, out, _) = cuspcert(&[
        "--format", "text", "check-subgroup", "--input", &data("two_cusp.json"), "--subgroup", &data("keep_cusp_1.json"),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("ANOMALOUS cusps [1]"), "{out}");
}

#[test]
fn malformed_row_length_exits_2() {
    let sub = temp_json(r#"{"n": 2, "rows": [[1, 0, 0]]}"#);
    let (code, out, err) = cuspcert(&["check-subgroup", "--input", &data("two_cusp.json"), "--subgroup", sub.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("input error"), "{err}");
}

#[test]
fn parse_errors_name_file_line_and_field() {
    let sub = temp_json("{\"n\": 2,\n \"rows\": [[1, 0, 0, \"x\"]]}");
    let path = sub.path().to_str().unwrap();
    let (code, _, err) = cuspcert(&["check-subgroup", "--input", &data("two_cusp.json"), "--subgroup", path]);
    assert_eq!(code, 2);
    assert!(err.contains(path), "{err}");
    assert!(err.contains(":2:"), "{err}");
    assert!(err.contains("rows"), "{err}");

    let sub = temp_json("{\"n\": 2,\n \"rowz\": []}");
    let (code, _, err) = cuspcert(&["check-subgroup", "--input", &data("two_cusp.json"), "--subgroup", sub.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("rowz"), "{err}");
}

#[test]
fn missing_file_and_bad_flags_exit_2() {
    let (code, _, _) = cuspcert(&["check-subgroup", "--input", "/nonexistent.json", "--subgroup", &data("diagonal.json")]);
    assert_eq!(code, 2);
    let (code, _, _) = cuspcert(&["scan", "--input", &data("two_cusp.json")]);
    assert_eq!(code, 2);
    let (code, _, _) = cuspcert(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, out, _) = cuspcert(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("scan"));
}

#[test]
fn one_cusp_scan_has_nothing_anomalous() {
    let m = temp_json(r#"{"n": 1}"#);
    let (code, out, _) = cuspcert(&["scan", "--input", m.path().to_str().unwrap(), "--codim", "1", "--max-coeff", "1"]);
    assert_eq!(code, 0);
    let r = result(&out);
    assert_eq!(r["summary"]["anomalous"], 0);
    assert_eq!(r["summary"]["distinct_lattices"], 4);
    assert!(r["subgroups"].as_array().unwrap().iter().all(|e| e["jacobian_rank"] == 1));
}

#[test]
fn codim_zero_scan_is_empty() {
    let (code, out, _) = cuspcert(&["scan", "--input", &data("two_cusp.json"), "--codim", "0"]);
    assert_eq!(code, 0);
    let r = result(&out);
    assert_eq!(r["summary"]["candidates"], 0);
    assert_eq!(r["subgroups"], serde_json::json!([]));
}

#[test]
fn oversized_box_is_refused_with_estimate() {
    let (code, _, err) = cuspcert(&["scan", "--input", &data("two_cusp.json"), "--codim", "1..4", "--max-coeff", "5"]);
    assert_eq!(code, 2);
    assert!(err.contains("box too large: about"), "{err}");
}

#[test]
fn codim_one_scan_groups_by_cusp() {
    let (code, out, _) = cuspcert(&["scan", "--input", &data("two_cusp.json"), "--codim", "1..2", "--max-coeff", "1"]);
    assert_eq!(code, 0);
    let r = result(&out);
    assert_eq!(r["summary"]["counterexamples"], 0);
    assert_eq!(r["summary"]["anomalous_by_cusp"], serde_json::json!({"1": 1, "2": 1}));
    let keys: Vec<String> = r["subgroups"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["rows"].to_string())
        .collect();
    let mut distinct = keys.clone();
    distinct.sort();
    distinct.dedup();
    assert_eq!(distinct.len(), keys.len());
}

#[test]
fn rational_scan_needs_shapes() {
    let (code, _, err) = cuspcert(&["scan", "--input", &data("two_cusp.json"), "--codim", "2", "--mode", "rational"]);
    assert_eq!(code, 2, "{err}");
    let (code, out, _) = cuspcert(&[
        "scan", "--input", &data("two_cusp.json"), "--codim", "2", "--mode", "rational", "--tau", "1/2,-3",
    ]);
    assert_eq!(code, 0);
    let r = result(&out);
    // τ₁ = 1/2 kills det = (1 + τ₂)(2τ₁ − 1) for M₁ = M₂²L₂², L₁ = M₂L₂
    assert_eq!(r["summary"]["counterexamples"], 0);
    assert!(r["summary"]["degenerate_shapes"].as_u64().unwrap() > 0);
    assert_eq!(r["summary"]["anomalous_by_cusp"], serde_json::json!({"1": 1, "2": 1}));

    let (code, out, _) = cuspcert(&[
        "scan", "--input", &data("two_cusp.json"), "--codim", "2", "--mode", "rational", "--tau", "7/3,-11/5",
    ]);
    assert_eq!(code, 0);
    assert_eq!(result(&out)["summary"]["anomalous"], 2);
}

#[test]
fn sgi_on_three_cusp_potential_reports_wgi() {
    let (code, out, _) = cuspcert(&["--format", "text", "series", "sgi", "--input", &data("three_cusp_potential.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("no SGI split; WGI: A={2} from B={3} keeping C={1}"), "{out}");
}

#[test]
fn wgi_with_explicit_sets() {
    let (code, out, _) = cuspcert(&[
        "series", "wgi", "--input", &data("three_cusp_potential.json"), "--set-a", "2", "--set-b", "3", "--set-c", "1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(result(&out)["wgi"], true);
}

#[test]
fn theta_on_product_potential() {
    let (code, out, _) = cuspcert(&[
        "series", "theta", "--input", &data("product_potential.json"), "--target", "v1", "--gen", "u1",
    ]);
    assert_eq!(code, 0);
    let r = result(&out);
    assert_eq!(r["success"], true, "{r}");
    let theta = r["samples"][0]["theta"].as_str().unwrap();
    assert!(theta.contains("2*s1^3"), "{r}");
}

#[test]
fn two_cusp_with_b_and_d_zero_is_usage_error() {
    let (code, _, err) = cuspcert(&[
        "series", "two-cusp", "--input", &data("product_potential.json"), "--coeffs", "1,0,1,0",
    ]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn parity_violation_names_the_monomial() {
    let m = temp_json(r#"{"n": 2, "terms": [{"u": [3, 1], "coeff": "1"}]}"#);
    let (code, _, err) = cuspcert(&["series", "parity", "--input", m.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("u1^3*u2"), "{err}");
}

#[test]
fn parity_passes_on_even_potential() {
    let (code, out, _) = cuspcert(&["series", "parity", "--input", &data("three_cusp_potential.json")]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn series_without_potential_is_input_error() {
    let (code, _, err) = cuspcert(&["series", "sgi", "--input", &data("two_cusp.json")]);
    assert_eq!(code, 2);
    assert!(err.contains("no potential"), "{err}");
}

#[test]
fn deficient_three_pairs() {
    let (code, out, _) = cuspcert(&["deficient", "--input", &data("pairs_three.json"), "--method", "brute"]);
    assert_eq!(code, 0);
    let r = result(&out);
    assert_eq!(r["hypothesis"], true);
    assert_eq!(r["brute"]["subset"], serde_json::json!([3]));

    let (code, out, _) = cuspcert(&["deficient", "--input", &data("pairs_three.json")]);
    assert_eq!(code, 0);
    assert_eq!(result(&out)["agreement"], "match");
}

#[test]
fn deficient_hypothesis_failure_reports_witness() {
    let f = temp_json(r#"{"n": 2, "pairs": [{"v": [1, 0], "w": [0, 0]}, {"v": [0, 1], "w": [0, 0]}]}"#);
    let (code, out, _) = cuspcert(&["deficient", "--input", f.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = result(&out);
    assert_eq!(r["hypothesis"], false);
    assert!(!r["witness"].is_null(), "{r}");
}

#[test]
fn deficient_one_cusp_is_vacuous() {
    let f = temp_json(r#"{"n": 1, "pairs": [{"v": [0], "w": [0]}]}"#);
    let (code, out, _) = cuspcert(&["deficient", "--input", f.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(result(&out)["vacuous"], true);
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let args = ["scan", "--input", &data("two_cusp.json"), "--codim", "1..2", "--max-coeff", "1", "--jobs", "3"];
    let (_, a, _) = cuspcert(&args);
    let (_, b, _) = cuspcert(&args);
    assert_eq!(a, b);
}
