use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn curveflow(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curveflow")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gen_then_analyze() {
    let dir = TempDir::new().unwrap();
    let out = curveflow(
        &["gen", "--variant", "ellipse", "--a", "2", "--b", "1", "--n", "128", "--out", "e.json"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("e.json").exists());

    let out = curveflow(&["analyze", "e.json", "--out", "report"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert!(report["diagnostics"]["thm1_margin"].as_f64().unwrap() > 0.0);
    assert!(report["diagnostics"]["thm2_G"].as_f64().unwrap() > 0.0);
    assert_eq!(report["identities"]["prop22"].as_object().unwrap().len(), 5);
    assert!(dir.path().join("report/diagnostics.json").exists());
    assert!(dir.path().join("report/identities.json").exists());
}

#[test]
fn csv_curve_input() {
    let dir = TempDir::new().unwrap();
    let text: String = (0..64)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / 64.0;
            format!("{},{}\n", 1.5 * t.cos(), t.sin())
        })
        .collect();
    std::fs::write(dir.path().join("c.csv"), text).unwrap();
    let out = curveflow(&["analyze", "c.csv", "--n", "64"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn flow_writes_trace_and_is_repeatable() {
    let dir = TempDir::new().unwrap();
    let args = |out: &'static str| {
        vec![
            "flow",
            "--variant",
            "perturbed-circle",
            "--seed",
            "11",
            "--n",
            "64",
            "--t-end",
            "0.2",
            "--record-interval",
            "2",
            "--flow",
            "area-preserving",
            "--out",
            out,
        ]
    };
    let first = curveflow(&args("a"), dir.path());
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let second = curveflow(&args("b"), dir.path());
    assert_eq!(code(&second), 0);

    let a = std::fs::read(dir.path().join("a/trace.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/trace.csv")).unwrap();
    assert_eq!(a, b);
    let header = String::from_utf8_lossy(&a).lines().next().unwrap().to_string();
    assert!(header.starts_with("t,L,A,I_m1,I_0"), "{header}");

    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/trace.json")).unwrap()).unwrap();
    assert_eq!(sidecar["kind"], "area-preserving");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/report.json")).unwrap()).unwrap();
    assert!(report["r_gap_final"].is_number());

    let fit = curveflow(&["fit", "a/trace.csv", "--quantity", "I_m1"], dir.path());
    assert_eq!(code(&fit), 0, "{}", String::from_utf8_lossy(&fit.stderr));
    assert!(json(&fit)["lambda"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"n": 128, "t_end": 0.05, "curve": {"variant": "ellipse", "a": 1.5, "b": 1.0}}"#;
    std::fs::write(dir.path().join("run.json"), config).unwrap();
    let out = curveflow(&["flow", "--config", "run.json", "--n", "64", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/trace.json")).unwrap()).unwrap();
    assert_eq!(sidecar["n"], 64);

    std::fs::write(dir.path().join("bad.json"), r#"{"n": 64, "colour": "red"}"#).unwrap();
    let out = curveflow(&["verify", "--config", "bad.json"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_standard_corpus() {
    let dir = TempDir::new().unwrap();
    let out = curveflow(&["verify", "--corpus", "standard"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let summary = json(&out);
    assert_eq!(summary["curves"], 20);
    assert_eq!(summary["violations"], 0);
    assert!(summary["thm3_sup"]["0,1"].is_number());
}

#[test]
fn error_exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&curveflow(&["verify", "--corpus", "empty"], dir.path())), 2);

    std::fs::write(dir.path().join("junk.json"), "{\"points\": 3}").unwrap();
    assert_eq!(code(&curveflow(&["analyze", "junk.json"], dir.path())), 2);

    let out = curveflow(&["gen", "--variant", "polar-cosine", "--eps", "2.0", "--base-radius", "1"], dir.path());
    assert_eq!(code(&out), 2);

    let eight: String = (0..128)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / 128.0;
            format!("{},{}\n", t.sin(), (2.0 * t).sin() / 2.0)
        })
        .collect();
    std::fs::write(dir.path().join("eight.csv"), eight).unwrap();
    assert_eq!(code(&curveflow(&["analyze", "eight.csv", "--n", "128"], dir.path())), 4);
}
