//! End-to-end tests of the binary: exit codes, JSON determinism, and the
//! report schema round trip.

use std::io::Write;
use std::process::{Command, Output};

use jetpde_cli::report::Report;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetpde"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_file(content: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    f.write_all(content.as_bytes()).unwrap();
    f
}

/// Single unknown, two equations: d_1 f = x2 f, d_2 f = 0.
const SHEAR_OPERATOR: &str = r#"{
    "n": 2, "k": 1, "p": 1, "q": 2,
    "base_point": ["0", "0"],
    "coefficients": [
        {"u": 1, "K": [1, 0], "v": 1, "expr": "1"},
        {"u": 1, "K": [0, 0], "v": 1, "expr": "-x2"},
        {"u": 2, "K": [0, 1], "v": 1, "expr": "1"}
    ]
}"#;

#[test]
fn analyze_operator_reports_verdicts() {
    let file = write_file(SHEAR_OPERATOR);
    let out = run(&["analyze-operator", file.path().to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.command, "analyze-operator");
    assert_eq!(report.range.as_deref(), Some("III"));
    assert_eq!(report.h0, Some(1));
    assert_eq!(report.ordinary, Some(true));
    assert_eq!(report.calibrated, Some(true));
    assert_eq!(report.solution_bound, Some(1));
    assert_eq!(report.flat, Some(false));
    let conc = report.concentration.unwrap();
    assert_eq!(conc.expected_zero_rows, 0);
    assert_eq!(conc.nonzero_rows, vec![1]);
}

#[test]
fn json_output_is_deterministic_and_round_trips() {
    let file = write_file(SHEAR_OPERATOR);
    let path = file.path().to_str().unwrap();
    let out1 = run(&["analyze-operator", path, "--json", "--emit-curvature"]);
    let out2 = run(&["analyze-operator", path, "--json", "--emit-curvature"]);
    assert!(out1.status.success());
    assert_eq!(out1.stdout, out2.stdout, "identical inputs must give identical bytes");

    let text = String::from_utf8(out1.stdout).unwrap();
    let report: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(report.to_json(), text.trim_end());
}

#[test]
fn curvature_emission_has_exact_entries() {
    let file = write_file(SHEAR_OPERATOR);
    let out = run(&[
        "analyze-operator",
        file.path().to_str().unwrap(),
        "--json",
        "--emit-curvature",
    ]);
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    let blocks = report.curvature.unwrap();
    assert_eq!(blocks.len(), 1);
    assert_eq!((blocks[0].i, blocks[0].j), (1, 2));
    // K_12 = d_2(x2) = 1, constant
    assert_eq!(blocks[0].constant, vec![vec!["1".to_string()]]);
    for lin in &blocks[0].linear {
        assert_eq!(lin.matrix, vec![vec!["0".to_string()]]);
    }
}

#[test]
fn probes_agree_on_smooth_operators() {
    let file = write_file(SHEAR_OPERATOR);
    let out = run(&["analyze-operator", file.path().to_str().unwrap(), "--json", "--probes", "2"]);
    assert!(out.status.success());
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    let probes = report.probes.unwrap();
    assert_eq!(probes.requested, 2);
    assert_eq!(probes.results.len(), 2);
    for probe in &probes.results {
        assert_eq!(probe.status, "ok");
        assert_eq!(probe.agrees, Some(true));
    }
}

#[test]
fn float_base_point_is_a_validation_error() {
    let bad = SHEAR_OPERATOR.replace(r#""base_point": ["0", "0"]"#, r#""base_point": ["0.5", "0"]"#);
    let file = write_file(&bad);
    let out = run(&["analyze-operator", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rational"));
}

#[test]
fn syntax_error_is_a_validation_error() {
    let bad = SHEAR_OPERATOR.replace("-x2", "x2 +");
    let file = write_file(&bad);
    let out = run(&["analyze-operator", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pole_at_base_point_is_a_degeneracy() {
    let bad = SHEAR_OPERATOR.replace(r#""expr": "-x2""#, r#""expr": "1/x1""#);
    let file = write_file(&bad);
    let out = run(&["analyze-operator", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pole"));
}

#[test]
fn missing_file_is_a_validation_error() {
    let out = run(&["analyze-operator", "/nonexistent/file.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_ranks_compares_against_the_formula() {
    let file = write_file(SHEAR_OPERATOR);
    let out = run(&["oracle-ranks", file.path().to_str().unwrap(), "--h", "2", "--json"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    let levels = report.oracle.unwrap();
    assert_eq!(levels.len(), 2);
    assert_eq!(levels[0].h, 1);
    assert_eq!(levels[0].formula, Some(1));
    assert_eq!(levels[0].agrees, Some(true));
    // beyond the critical order the formula no longer applies
    assert_eq!(levels[1].h, 2);
    assert_eq!(levels[1].formula, None);
}

#[test]
fn wc_family_reports_the_maximal_rank_web() {
    let out = run(&["wc-family", "--n", "2", "--c", "0", "--json"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.command, "wc-family");
    assert_eq!(report.calibrated, Some(true));
    assert_eq!(report.solution_bound, Some(6));
    assert_eq!(report.flat, Some(true));
    let web = report.web.unwrap();
    assert_eq!(web.d, 5);
    assert_eq!(web.damiano_bound, 6);
}

#[test]
fn wc_family_rejects_degenerate_base() {
    // the diagonal is degenerate for this family
    let out = run(&["wc-family", "--n", "2", "--c", "0", "--base", "1/3,1/3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_web_file_runs_the_pipeline() {
    // three coordinate-ish directions in the plane: a 3-web
    let web = r#"{
        "n": 2, "d": 3,
        "base_point": ["1/3", "1/5"],
        "fields": [["1", "0"], ["0", "1"], ["1", "1"]]
    }"#;
    let file = write_file(web);
    let out = run(&["analyze-web", file.path().to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    // a parallel 3-web has the single constant abelian relation
    assert_eq!(report.solution_bound, Some(1));
    assert_eq!(report.flat, Some(true));
}

#[test]
fn sample_operator_file_is_calibrated_with_bound_three() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../samples/first_order_2x3.json");
    let out = run(&["analyze-operator", path, "--json"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.h0, Some(2));
    assert_eq!(report.ordinary, Some(true));
    assert_eq!(report.calibrated, Some(true));
    assert_eq!(report.solution_bound, Some(3));
    let levels = report.frame_levels.unwrap();
    assert_eq!(levels.len(), 2);
    assert_eq!((levels[0].size, levels[1].size), (2, 1));
}

#[test]
fn sample_web_file_runs() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../samples/hexagonal_3web.json");
    let out = run(&["analyze-web", path, "--json"]);
    assert!(out.status.success());
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.solution_bound, Some(1));
}

#[test]
fn text_mode_is_the_default() {
    let file = write_file(SHEAR_OPERATOR);
    let out = run(&["analyze-operator", file.path().to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("command: analyze-operator"));
    assert!(text.contains("range: III"));
    assert!(!text.trim_start().starts_with('{'));
}
