use std::process::{Command, Output};

use serde_json::Value;

const SET_A: &str = "0.25,0.25,0.25,0.25";
const SET_B: &str = "0.5,0.25,0.125,0.125";

fn povmforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_povmforge"))
        .args(args)
        .env_remove("POVMFORGE_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_set_a_passes_with_p5_note() {
    let out = povmforge(&["verify", "--inv-sq", SET_A, "--q", "auto"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    let notes = report["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("P5 = 0")));
}

#[test]
fn verify_report_round_trips_at_twelve_digits() {
    let out = povmforge(&["verify", "--inv-sq", SET_B, "--q", "auto", "--shots", "2000"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed: povmforge_core::AuditReport = serde_json::from_str(&text).unwrap();
    let again = povmforge_core::emit_report(&parsed, povmforge_core::ReportFormat::Json) + "\n";
    assert_eq!(again, text);
}

#[test]
fn inv_sq_arity_is_a_usage_error() {
    assert_eq!(code(&povmforge(&["povm", "--inv-sq", "0.5,0.5"])), 2);
}

#[test]
fn parameter_forms_are_exclusive() {
    let both = povmforge(&["povm", "--inv-sq", SET_A, "--alpha", "2", "--beta", "2", "--gamma", "2", "--delta", "2"]);
    assert_eq!(code(&both), 2);
    assert_eq!(code(&povmforge(&["povm", "--alpha", "2", "--beta", "2"])), 2);
    assert_eq!(code(&povmforge(&["povm"])), 2);
}

#[test]
fn direct_and_reciprocal_forms_agree() {
    let a = povmforge(&["povm", "--inv-sq", SET_A]);
    let b = povmforge(&["povm", "--alpha", "2", "--beta", "2", "--gamma", "-2", "--delta", "2"]);
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    assert_eq!(stdout_json(&a)["params"]["q"], stdout_json(&b)["params"]["q"]);
    assert_eq!(stdout_json(&b)["params"]["gamma"].as_f64(), Some(-2.0));
}

#[test]
fn validation_errors_name_the_constraint() {
    let out = povmforge(&["povm", "--inv-sq", SET_B, "--q", "1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("positivity"));
    let out = povmforge(&["povm", "--inv-sq", "0.5,0.5,0.5,0.5"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("normalization"));
    assert_eq!(code(&povmforge(&["povm", "--inv-sq", SET_B, "--q", "fast"])), 2);
}

#[test]
fn povm_reports_set_b_spectrum() {
    let out = povmforge(&["povm", "--inv-sq", SET_B]);
    assert_eq!(code(&out), 0);
    let json = stdout_json(&out);
    let p5: Vec<f64> = json["eigenvalues"][4].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for (got, want) in p5.iter().zip([0.0, 0.5, 0.75, 0.75]) {
        assert!((got - want).abs() < 1e-12, "{p5:?}");
    }
    assert_eq!(json["elements"].as_array().unwrap().len(), 5);
}

#[test]
fn simulate_set_b_never_reports_outcome_five() {
    let out = povmforge(&["simulate", "--inv-sq", SET_B, "--q", "auto", "--input", "00", "--shots", "100000", "--seed", "42"]);
    assert_eq!(code(&out), 0);
    let hist = stdout_json(&out);
    assert_eq!(hist["counts"][4], 0);
    assert_eq!(hist["shots"], 100000);
    let total: u64 = hist["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(total, 100000);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["simulate", "--inv-sq", SET_B, "--input", "psi2", "--shots", "5000", "--seed", "7", "--route", "circuit"];
    let a = povmforge(&args);
    let b = povmforge(&args);
    assert_eq!(a.stdout, b.stdout);
    let synth = ["synth", "--inv-sq", SET_A, "--format", "qasm"];
    assert_eq!(povmforge(&synth).stdout, povmforge(&synth).stdout);
}

#[test]
fn seed_comes_from_environment() {
    let run = |seed: Option<&str>, flag: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_povmforge"));
        cmd.args(["simulate", "--inv-sq", SET_B, "--input", "11", "--shots", "3000"]).args(flag);
        match seed {
            Some(s) => cmd.env("POVMFORGE_SEED", s),
            None => cmd.env_remove("POVMFORGE_SEED"),
        };
        cmd.output().unwrap().stdout
    };
    assert_eq!(run(Some("99"), &[]), run(None, &["--seed", "99"]));
    let json: Value = serde_json::from_slice(&run(Some("99"), &[])).unwrap();
    assert_eq!(json["seed"], 99);
}

#[test]
fn zero_shots_is_a_usage_error() {
    assert_eq!(code(&povmforge(&["simulate", "--inv-sq", SET_B, "--shots", "0"])), 2);
}

#[test]
fn tolerance_override_is_reported_and_enforced() {
    let dir = std::env::temp_dir().join(format!("povmforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let report = dir.join("dilate.json");
    let out = povmforge(&["dilate", "--inv-sq", SET_B, "--tolerance", "1e-30", "--report", report.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    for c in json["checks"].as_array().unwrap() {
        assert_eq!(c["tolerance"].as_f64(), Some(1e-30));
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reference_audits_gate_only_under_strict() {
    let loose = ["paper-matrix", "--inv-sq", SET_B, "--tolerance", "1e-30"];
    assert_eq!(code(&povmforge(&loose)), 0);
    let strict = ["paper-matrix", "--inv-sq", SET_B, "--tolerance", "1e-30", "--strict"];
    assert_eq!(code(&povmforge(&strict)), 1);
    assert_eq!(code(&povmforge(&["paper-matrix", "--inv-sq", SET_B, "--strict"])), 0);
    let loose = ["decompose", "--source", "paper", "--inv-sq", SET_B, "--tolerance", "1e-30"];
    assert_eq!(code(&povmforge(&loose)), 0);
    let strict = ["decompose", "--source", "paper", "--inv-sq", SET_B, "--tolerance", "1e-30", "--strict"];
    assert_eq!(code(&povmforge(&strict)), 1);
}

#[test]
fn paper_matrix_output_has_tags() {
    let out = povmforge(&["paper-matrix", "--inv-sq", SET_A]);
    let json = stdout_json(&out);
    assert_eq!(json["source"], "paper-matrix");
    assert_eq!(json["matrix"].as_array().unwrap().len(), 32);
    assert_eq!(json["tags"][0][0], "q/α²");
    assert!(String::from_utf8_lossy(&out.stderr).contains("overall: PASS"));
}

#[test]
fn decompose_outputs() {
    let generic = stdout_json(&povmforge(&["decompose", "--inv-sq", SET_B]));
    assert_eq!(generic["dim"], 32);
    assert_eq!(generic["convention"], "left-first");
    assert!(generic["ops"].as_array().unwrap().len() <= 496);
    let paper = stdout_json(&povmforge(&["decompose", "--source", "paper", "--inv-sq", SET_B, "--order", "reversed"]));
    assert_eq!(paper["convention"], "reversed");
    assert_eq!(paper["ops"].as_array().unwrap().len(), 43);
    assert_eq!(paper["ops"][0]["i"], 0);
    assert_eq!(paper["ops"][0]["j"], 1);
    assert_eq!(code(&povmforge(&["decompose", "--inv-sq", SET_B, "--order", "reversed"])), 2);
}

#[test]
fn synth_formats() {
    let json = povmforge(&["synth", "--inv-sq", SET_B, "--source", "paper"]);
    assert_eq!(code(&json), 0);
    let circ = stdout_json(&json);
    assert_eq!(circ["version"], 1);
    assert_eq!(circ["qubits"], 5);
    assert_eq!(circ["convention"], "msb-first");
    let kinds: std::collections::BTreeSet<&str> =
        circ["gates"].as_array().unwrap().iter().map(|g| g["kind"].as_str().unwrap()).collect();
    assert!(kinds.iter().all(|k| *k == "single" || *k == "cnot"));

    let qasm = povmforge(&["synth", "--inv-sq", SET_B, "--source", "paper", "--format", "qasm"]);
    let text = String::from_utf8(qasm.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("qubits 5"));
    for line in lines {
        assert!(line.starts_with("u(") && line.split(' ').count() == 9 || line.starts_with("cx "), "{line}");
    }
    assert_eq!(code(&povmforge(&["povm", "--inv-sq", SET_B, "--format", "qasm"])), 2);
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("povmforge-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("dilation.json");
    let to_file = povmforge(&["dilate", "--inv-sq", SET_A, "--output", path.to_str().unwrap()]);
    assert!(to_file.stdout.is_empty());
    let to_stdout = povmforge(&["dilate", "--inv-sq", SET_A]);
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
    std::fs::remove_dir_all(&dir).ok();
}
