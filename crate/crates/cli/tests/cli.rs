use std::io::Write;
use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qrdt")).args(args).output().expect("binary runs");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report, String::from_utf8(out.stderr).unwrap())
}

fn run_fixture(command: &str, name: &str, extra: &[&str]) -> (i32, Value) {
    let path = fixture(name);
    let mut args = vec![command, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, report, _) = run(&args);
    (code, report)
}

fn block(report: &Value, pointer: &str) -> Vec<Vec<f64>> {
    serde_json::from_value(report.pointer(pointer).unwrap().clone()).unwrap()
}

#[test]
fn validate_verdicts() {
    let (code, r) = run_fixture("validate", "lottery_valid.json", &[]);
    assert_eq!((code, r["verdict"].as_str()), (0, Some("valid")));
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);

    let (code, r) = run_fixture("validate", "lottery_sum_off.json", &[]);
    assert_eq!((code, r["verdict"].as_str()), (2, Some("invalid")));
    assert_eq!(r["result"]["violation"]["kind"], "sum-residual");
    assert!((r["result"]["violation"]["residual"].as_f64().unwrap() - 0.1).abs() < 1e-12);

    let (code, r) = run_fixture("validate", "lottery_table.json", &[]);
    assert_eq!((code, r["result"]["m"].as_u64()), (0, Some(3)));
}

#[test]
fn input_errors_exit_65() {
    let (code, r, stderr) = run(&["validate", fixture("malformed.json").to_str().unwrap()]);
    assert_eq!(code, 65);
    assert_eq!(r["verdict"], "error");
    assert!(stderr.contains("malformed.json:2:"), "{stderr}");

    let (code, _, _) = run(&["validate", "/nonexistent/lottery.json"]);
    assert_eq!(code, 65);

    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, r#"{{"m":2,"n":2,"gambles":[{{"blocks":[{{"n":2,"re":[[1,2],[3,1]]}}]}}]}}"#).unwrap();
    let (code, r, _) = run(&["coherence", f.path().to_str().unwrap()]);
    assert_eq!((code, r["result"]["kind"].as_str()), (65, Some("input")));

    let (code, _) = run_fixture("condition", "condition_not_unit.json", &[]);
    assert_eq!(code, 65);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&["frobnicate"]).0, 64);
    assert_eq!(run(&[]).0, 64);
    let path = fixture("coherent.json");
    assert_eq!(run(&["coherence", path.to_str().unwrap(), "--tol-psd", "-1"]).0, 64);
    assert_eq!(run(&["properties", "--workers", "0"]).0, 64);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn coherence_certificates() {
    let (code, r) = run_fixture("coherence", "coherent.json", &[]);
    assert_eq!((code, r["verdict"].as_str()), (0, Some("coherent")));
    let rho = block(&r, "/result/certificate/rho/blocks/0/re");
    assert!((rho[0][0] + rho[1][1] - 1.0).abs() < 1e-9);
    assert!(rho[0][0] - rho[1][1] >= 0.0);

    let (code, r) = run_fixture("coherence", "incoherent.json", &[]);
    assert_eq!((code, r["verdict"].as_str()), (3, Some("incoherent")));
    let w: Vec<f64> = serde_json::from_value(r["result"]["certificate"]["weights"].clone()).unwrap();
    assert!(w.iter().all(|x| *x >= 0.0) && w.iter().sum::<f64>() > 0.0);

    let (code, r) = run_fixture("coherence", "vacuous.json", &[]);
    assert_eq!((code, r["verdict"].as_str()), (0, Some("coherent")));
}

#[test]
fn prefer_verdicts_and_strict_exit() {
    let (code, r) = run_fixture("prefer", "prefer_state.json", &[]);
    assert_eq!((code, r["verdict"].as_str()), (0, Some("prefers")));
    assert!((r["result"]["margin"].as_f64().unwrap() - 0.2).abs() < 1e-12);

    let (code, r) = run_fixture("prefer", "prefer_reverse.json", &[]);
    assert_eq!((code, r["verdict"].as_str()), (0, Some("not-prefers")));
    let (code, _) = run_fixture("prefer", "prefer_reverse.json", &["--strict-exit"]);
    assert_eq!(code, 4);

    // The only assessment sits on the boundary of its own cone.
    let (code, r) = run_fixture("prefer", "prefer_sdg.json", &["--strict-exit"]);
    assert_eq!((code, r["verdict"].as_str()), (4, Some("boundary")));

    let (code, r) = run_fixture("prefer", "prefer_invalid_lottery.json", &[]);
    assert_eq!((code, r["result"]["kind"].as_str()), (2, Some("invalid-lottery")));
}

#[test]
fn represent_recovers_the_state() {
    let (code, r) = run_fixture("represent", "near_maximal.json", &[]);
    assert_eq!((code, r["verdict"].as_str()), (0, Some("maximal")));
    let re = block(&r, "/result/R/blocks/0/re");
    let expected = [[0.6, 0.0], [0.0, 0.4]];
    let mut err = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            err += (re[i][j] - expected[i][j]).powi(2);
        }
    }
    assert!(err.sqrt() < 1e-6, "error {}", err.sqrt());

    let (code, r) = run_fixture("represent", "coherent.json", &["--strict-exit"]);
    assert_eq!((code, r["verdict"].as_str()), (4, Some("not-maximal")));
    let (code, _) = run_fixture("represent", "incoherent.json", &[]);
    assert_eq!(code, 3);
}

#[test]
fn factorize_verdicts() {
    let (code, r) = run_fixture("factorize", "state_product.json", &[]);
    assert_eq!((code, r["verdict"].as_str()), (0, Some("factorized")));
    assert_eq!(r["result"]["p"], serde_json::json!([0.5, 0.5]));
    assert_eq!(block(&r, "/result/rho/re"), vec![vec![0.6, 0.0], vec![0.0, 0.4]]);
    assert_eq!(r["result"]["residual"].as_f64(), Some(0.0));

    let (code, r) = run_fixture("factorize", "state_split.json", &[]);
    assert_eq!((code, r["verdict"].as_str()), (0, Some("not-factorizable")));
    assert!((r["result"]["max_deviation"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn condition_requests() {
    let (code, r) = run_fixture("condition", "condition_state.json", &[]);
    assert_eq!(code, 0);
    assert!((r["result"]["event_upper_probability"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert_eq!(block(&r, "/result/updated_state/blocks/0/re"), vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
    assert_eq!(r["result"]["verdicts"][0]["verdict"], "StrictlyDesirable");
    assert_eq!(r["result"]["verdicts"][1]["verdict"], "NotDesirable");

    let (code, r) = run_fixture("condition", "condition_assessments.json", &[]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["verdicts"][0]["verdict"], "StrictlyDesirable");

    let (code, r) = run_fixture("condition", "condition_zero.json", &[]);
    assert_eq!((code, r["result"]["kind"].as_str()), (5, Some("precondition")));
}

#[test]
fn simulate_is_deterministic() {
    let path = fixture("simulate.json");
    let args = ["simulate", path.to_str().unwrap(), "--trials", "20000", "--seed", "3"];
    let a = Command::new(env!("CARGO_BIN_EXE_qrdt")).args(args).output().unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_qrdt")).args(args).output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["verdict"], "no-sure-loss");
    assert_eq!(r["result"]["trials"], 20000);

    let (code, _) = run_fixture("simulate", "simulate_outside.json", &[]);
    assert_eq!(code, 5);
}

#[test]
fn properties_suites() {
    let (code, r, _) = run(&["properties", "--suite", "archimedean"]);
    assert_eq!((code, r["verdict"].as_str()), (0, Some("passed")));
    assert_eq!(r["result"]["cases"], 3);
    assert!(r["result"]["results"][2]["detail"].as_str().unwrap().contains("not applicable"));

    let (code, r, _) = run(&["properties", "--suite", "lotteries", "--cases", "8", "--seed", "5", "--workers", "2"]);
    assert_eq!((code, r["result"]["violations"].as_u64()), (0, Some(0)));
    assert_eq!(r["result"]["results"][7]["seed"], 12);
}

#[test]
fn reports_round_trip() {
    let (_, r) = run_fixture("validate", "lottery_valid.json", &[]);
    let input: Value = serde_json::from_str(&std::fs::read_to_string(fixture("lottery_valid.json")).unwrap()).unwrap();
    assert_eq!(r["result"]["lottery"], input);

    let text = serde_json::to_string(&r).unwrap();
    let again: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(again, r);
    let (_, twice) = run_fixture("validate", "lottery_valid.json", &[]);
    assert_eq!(twice["digest"], r["digest"]);
}

#[test]
fn text_format() {
    let path = fixture("prefer_state.json");
    let out = Command::new(env!("CARGO_BIN_EXE_qrdt")).args(["prefer", path.to_str().unwrap(), "--format", "text"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("prefer: prefers\n"), "{text}");
    assert!(text.contains("margin: 0.19999"));
}
