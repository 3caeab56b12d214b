use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn glvp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glvp"))
        .args(args)
        .env_remove("SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_nutku_is_glvp_with_one_casimir() {
    let out = glvp(&["analyze", s(&example("nutku.json"))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["glvp"], true);
    assert_eq!(report["factorization_source"], "supplied");
    assert_eq!(report["ranks"]["M"], 2);
    assert_eq!(report["ranks"]["A"], 2);
    assert_eq!(report["ranks"]["K"], 2);
    assert_eq!(report["casimirs"], serde_json::json!([[1, -1, 1]]));
    assert_eq!(report["jacobi_residual"], 0);
    assert_eq!(report["hamiltonian"]["terms"].as_array().unwrap().len(), 3);
}

#[test]
fn analyze_solves_when_no_certificate_is_given() {
    let out = glvp(&["analyze", s(&example("predator_prey.json"))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["factorization_source"], "solved");
    assert_eq!(report["casimirs"], serde_json::json!([]));
}

#[test]
fn analyze_logistic_reports_the_rank_obstruction() {
    let out = glvp(&["analyze", s(&example("logistic1d.json"))]);
    assert_eq!(code(&out), 3);
    let report = json(&out);
    assert_eq!(report["glvp"], false);
    let diagnosis = report["diagnosis"].as_str().unwrap();
    assert!(diagnosis.contains("rank A = 1"), "{diagnosis}");
    assert!(stderr(&out).contains("not GLVP"));
}

#[test]
fn malformed_inputs_exit_2_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let rank_deficient = write(
        dir.path(),
        "rd.json",
        r#"{"name": "rd", "n": 2, "m": 2, "lambda": [0, 0], "A": [[0, 1], [-1, 0]], "B": [[1, 1], [2, 2]]}"#,
    );
    let out = glvp(&["analyze", s(&rank_deficient)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("B not maximal rank"), "{}", stderr(&out));

    let truncated = write(dir.path(), "t.json", "{\n  \"name\": \"t\",\n  \"n\": 2,\n");
    let out = glvp(&["analyze", s(&truncated)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));

    let bad_field = write(
        dir.path(),
        "f.json",
        r#"{"name": "f", "n": 2, "m": 2, "lambda": [0, 0], "A": [[0, 1], [-1, "x"]], "B": [[1, 0], [0, 1]]}"#,
    );
    let out = glvp(&["analyze", s(&bad_field)]);
    assert_eq!(code(&out), 2);

    let out = glvp(&["analyze", s(&dir.path().join("missing.json"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn a_wrong_certificate_is_an_input_error() {
    let text = std::fs::read_to_string(example("nutku.json"))
        .unwrap()
        .replace("\"D_diag\": [1, 1, -1]", "\"D_diag\": [1, 1, 1]");
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.json", &text);
    let out = glvp(&["analyze", s(&path)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn identity_qmt_reprints_the_file_byte_for_byte() {
    for name in ["nutku.json", "predator_prey.json", "logistic1d.json"] {
        let path = example(name);
        let out = glvp(&["transform", s(&path), "--qmt", "identity"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert_eq!(stdout(&out), std::fs::read_to_string(&path).unwrap(), "{name}");
    }
}

#[test]
fn qmt_from_file_transforms_system_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "c.json", r#"{"C": [[1, 0, 0], [0, 1, 0], [-1, 1, 1]]}"#);
    let out = glvp(&["transform", s(&example("nutku.json")), "--qmt", s(&c)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let moved = write(dir.path(), "moved.json", &stdout(&out));
    // The transformed certificate is accepted as supplied.
    let out = glvp(&["analyze", s(&moved)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["factorization_source"], "supplied");

    let singular = write(dir.path(), "s.json", "[[1, 1, 0], [1, 1, 0], [0, 0, 1]]");
    let out = glvp(&["transform", s(&example("nutku.json")), "--qmt", s(&singular)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn decoupling_nutku_gives_a_two_dimensional_system() {
    let out = glvp(&["transform", s(&example("nutku.json")), "--decouple", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sys = json(&out);
    assert_eq!(sys["n"], 2);
    assert_eq!(sys["m"], 3);
    assert_eq!(sys["factorization"]["K"], serde_json::json!([[0, -1], [1, 0]]));

    let out = glvp(&["transform", s(&example("predator_prey.json")), "--decouple", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn embed_then_decouple_restores_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = glvp(&["transform", s(&example("nutku.json")), "--decouple", "1"]);
    let reduced = write(dir.path(), "reduced.json", &stdout(&out));
    for alpha in ["1", "3/2"] {
        let out = glvp(&["transform", s(&reduced), "--embed", "1", "--alpha", alpha]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let embedded = write(dir.path(), "embedded.json", &stdout(&out));
        assert_eq!(json(&out)["n"], 3);
        let out = glvp(&["transform", s(&embedded), "--decouple", "1", "--alpha", alpha]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert_eq!(stdout(&out), std::fs::read_to_string(&reduced).unwrap());
    }
    // m = n leaves no room for a new independent column of B.
    let out = glvp(&["transform", s(&example("nutku.json")), "--embed", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn transform_requires_exactly_one_operation() {
    let nutku = example("nutku.json");
    assert_eq!(code(&glvp(&["transform", s(&nutku)])), 2);
    assert_eq!(
        code(&glvp(&["transform", s(&nutku), "--qmt", "identity", "--decouple", "1"])),
        2
    );
}

#[test]
fn darboux_routes_agree_on_the_lifted_structure() {
    let mut lifted = Vec::new();
    for method in ["general", "decoupling", "linear"] {
        let out = glvp(&["darboux", s(&example("nutku.json")), "--method", method]);
        assert_eq!(code(&out), 0, "{method}: {}", stderr(&out));
        let report = json(&out);
        assert_eq!(report["method"], method);
        assert_eq!(report["r"], 2);
        lifted.push(report["J_lifted"].clone());
        let h = &report["hamiltonian"];
        assert_eq!(h["chart"], "log");
        assert_eq!(h["terms"].as_array().unwrap().len(), 3);
        if method == "decoupling" {
            assert_eq!(report["J"], serde_json::json!([[0, 1], [-1, 0]]));
        } else {
            assert_eq!(report["J"], serde_json::json!([[0, 1, 0], [-1, 0, 0], [0, 0, 0]]));
            let linear = h["linear"].as_array().unwrap();
            assert_eq!(linear.iter().filter(|v| **v != 0).count(), 3);
        }
    }
    assert!(lifted.iter().all(|j| *j == lifted[0]));
    assert_eq!(lifted[0], serde_json::json!([[0, 1, 0], [-1, 0, 0], [0, 0, 0]]));
}

#[test]
fn darboux_of_a_non_poisson_system_exits_3() {
    let out = glvp(&["darboux", s(&example("logistic1d.json"))]);
    assert_eq!(code(&out), 3);
}

#[test]
fn simulate_writes_csv_and_a_conservation_report() {
    let out = glvp(&[
        "simulate",
        s(&example("nutku.json")),
        "--x0",
        "1,0.5,2",
        "--t-end",
        "0.4",
        "--check-conservation",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let (csv, report) = text.split_at(text.find('{').unwrap());
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,x3"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 200);
    assert_eq!(rows[0], vec![0.0, 1.0, 0.5, 2.0]);
    assert!((rows.last().unwrap()[0] - 0.4).abs() < 1e-15);
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));

    let report: Value = serde_json::from_str(report).unwrap();
    assert_eq!(report["within_tolerance"], true);
    let quantities = report["quantities"].as_array().unwrap();
    assert_eq!(quantities.len(), 2);
    for q in quantities {
        assert!(q["max_rel_drift"].as_f64().unwrap() < 1e-6, "{q}");
    }
}

#[test]
fn simulate_can_write_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, report) = (dir.path().join("t.csv"), dir.path().join("r.json"));
    let out = glvp(&[
        "simulate",
        s(&example("predator_prey.json")),
        "--x0",
        "1/2,2",
        "--t-end",
        "5",
        "--check-conservation",
        "--out",
        s(&csv),
        "--report",
        s(&report),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("t,x1,x2\n"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["within_tolerance"], true);
}

#[test]
fn simulate_rejects_states_off_the_orthant() {
    let nutku = example("nutku.json");
    for x0 in ["1,0,2", "1,-1,2", "1,2", "1,a,2"] {
        let out = glvp(&["simulate", s(&nutku), "--x0", x0, "--t-end", "1"]);
        assert_eq!(code(&out), 2, "{x0}");
        assert!(stderr(&out).contains("x0"), "{}", stderr(&out));
    }
}

#[test]
fn unreachable_drift_tolerance_exits_4() {
    let out = glvp(&[
        "simulate",
        s(&example("nutku.json")),
        "--x0",
        "1,0.5,2",
        "--t-end",
        "0.4",
        "--check-conservation",
        "--drift-tol",
        "1e-30",
    ]);
    assert_eq!(code(&out), 4);
    // The report is still written.
    assert!(stdout(&out).contains("\"within_tolerance\": false"));
}

#[test]
fn integrating_through_the_nutku_singularity_exits_5() {
    let out = glvp(&[
        "simulate",
        s(&example("nutku.json")),
        "--x0",
        "1,0.5,2",
        "--t-end",
        "20",
        "--check-conservation",
    ]);
    assert_eq!(code(&out), 5);
    assert!(stderr(&out).contains("integration failed"), "{}", stderr(&out));
}

#[test]
fn conservation_check_needs_a_poisson_system() {
    let out = glvp(&[
        "simulate",
        s(&example("logistic1d.json")),
        "--x0",
        "0.5",
        "--t-end",
        "1",
        "--check-conservation",
    ]);
    assert_eq!(code(&out), 3);
    let out = glvp(&["simulate", s(&example("logistic1d.json")), "--x0", "0.5", "--t-end", "1"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn outputs_are_deterministic() {
    let nutku = example("nutku.json");
    let runs: [&[&str]; 4] = [
        &["analyze", s(&nutku)],
        &["darboux", s(&nutku), "--method", "decoupling"],
        &["simulate", s(&nutku), "--x0", "1,0.5,2", "--t-end", "0.3", "--check-conservation"],
        &["verify", "--cases", "5"],
    ];
    for args in runs {
        let (a, b) = (glvp(args), glvp(args));
        assert_eq!(code(&a), 0, "{args:?}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn verify_runs_the_property_suite() {
    let out = glvp(&["verify", "--cases", "10", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.starts_with("property suite, seed 3"));
    assert_eq!(text.lines().filter(|l| l.starts_with("ok")).count(), 7);

    let seeded = Command::new(env!("CARGO_BIN_EXE_glvp"))
        .args(["verify", "--cases", "3"])
        .env("SEED", "9")
        .output()
        .unwrap();
    assert!(String::from_utf8(seeded.stdout).unwrap().starts_with("property suite, seed 9"));
}
