use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_decoy-aoi"));
    c.env_remove("DECOY_AOI_SEED").env_remove("RUST_LOG");
    c
}

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_error(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    v["error"].clone()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn analytic_prints_intermediates() {
    let v = stdout_json(&run(bin().arg("analytic").arg(scenarios().join("baseline.json"))));
    let a = &v["analytic"];
    for key in ["p_busy", "p_j", "p_loss", "paoi", "roc"] {
        assert!(!a[key].is_null(), "{key}");
    }
    assert_eq!(a["model"], "m1");
    assert!(a["paoi"].as_f64().unwrap() > 2.0);
}

#[test]
fn validate_echoes_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", "{}");
    let v = stdout_json(&run(bin().arg("validate").arg(&p)));
    assert_eq!(v["valid"], true);
    assert_eq!(v["scenario"]["seed"], 1);
    assert_eq!(v["scenario"]["n_slots"], 1_000_000);
}

#[test]
fn invalid_scenario_reports_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", r#"{"traffic": {"q": 1.5}}"#);
    let e = stderr_error(&run(bin().arg("validate").arg(&p)));
    assert_eq!(e["field"], "traffic.q");
    assert!(e["message"].as_str().unwrap().contains("1.5"));
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", "{\n\n  \"seed\": ,\n}");
    let e = stderr_error(&run(bin().arg("analytic").arg(&p)));
    assert_eq!(e["line"], 3);
    assert!(e["column"].as_u64().is_some());
}

#[test]
fn missing_file_reports_path() {
    let e = stderr_error(&run(bin().arg("analytic").arg("/nonexistent/s.json")));
    assert_eq!(e["path"], "/nonexistent/s.json");
}

#[test]
fn simulate_seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let plain = write(dir.path(), "a.json", r#"{"n_slots": 5000}"#);
    let seeded = write(dir.path(), "b.json", r#"{"n_slots": 5000, "seed": 11}"#);
    let seed_of = |out: Output| stdout_json(&out)["seed"].as_u64().unwrap();

    assert_eq!(seed_of(run(bin().arg("simulate").arg(&plain))), 1);
    assert_eq!(seed_of(run(bin().arg("simulate").arg(&plain).env("DECOY_AOI_SEED", "5"))), 5);
    assert_eq!(seed_of(run(bin().arg("simulate").arg(&seeded).env("DECOY_AOI_SEED", "5"))), 11);
    assert_eq!(
        seed_of(run(bin().args(["simulate", "--seed", "3"]).arg(&seeded).env("DECOY_AOI_SEED", "5"))),
        3
    );
    let e = stderr_error(&run(bin().arg("simulate").arg(&plain).env("DECOY_AOI_SEED", "abc")));
    assert_eq!(e["field"], "DECOY_AOI_SEED");
}

#[test]
fn simulate_is_reproducible() {
    let p = scenarios().join("energy_detector.json");
    let a = run(bin().args(["simulate", "--slots", "20000"]).arg(&p));
    let b = run(bin().args(["simulate", "--slots", "20000"]).arg(&p));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    assert_eq!(v["n_slots"], 20000);
    assert_eq!(v["seed"], 7);
    assert!(v["stats"]["mean_paoi"].as_f64().is_some());
}

#[test]
fn simulate_trace_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = run(bin()
        .args(["simulate", "--slots", "3000", "--compare", "--trace"])
        .arg(&trace)
        .arg(scenarios().join("baseline.json")));
    let v = stdout_json(&out);
    let c = &v["comparison"];
    assert!(c["analytic"]["paoi"].as_f64().is_some());
    assert!(c["within_ci"].is_boolean());
    let text = fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().next(), Some("slot,truth,jam,outage,qlen,age"));
    assert_eq!(text.lines().count() as u64 - 1, c["simulated"]["blocks"].as_u64().unwrap());
}

#[test]
fn sweep_spec_file_to_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        &format!(
            r#"{{"base": "{}", "parameter": "traffic.q", "values": [0.0, 0.5, 1.0],
                "series": [{{"name": "small", "set": {{"n_slots": 5000}}}}]}}"#,
            scenarios().join("baseline.json").display()
        ),
    );
    let csv = run(bin().arg("sweep").arg(&spec));
    assert!(csv.status.success(), "{}", String::from_utf8_lossy(&csv.stderr));
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("swept_value,engine,p_busy,p_j,p_loss,paoi,paoi_ci,jammer_avg_power,series")
    );
    assert_eq!(lines.count(), 6);

    let svg_path = dir.path().join("plot.svg");
    let out = run(bin().arg("sweep").arg(&spec).arg("--out").arg(&svg_path).args(["--metric", "p-loss"]));
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains(">p_loss</text>"));
}

#[test]
fn unknown_recipe_is_an_error() {
    let e = stderr_error(&run(bin().args(["sweep", "fig42"])));
    assert!(e["message"].as_str().unwrap().contains("fig4a"));
}

#[test]
fn detector_table_check() {
    let v = stdout_json(&run(bin()
        .args(["detector-table", "check"])
        .arg(scenarios().join("detector_table.json"))));
    assert_eq!(v["valid"], true);
    assert_eq!(v["packet_sizes"], serde_json::json!([16, 32]));
    assert_eq!(v["snr_points"], 7);
    assert_eq!(v["p_detect_monotone"], true);

    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "t.json",
        r#"{"packet_sizes": [16], "snr_db": [0.0, 1.0], "p_detect": [[0.5, 1.2]], "p_false_alarm": [[0.1, 0.1]]}"#,
    );
    let e = stderr_error(&run(bin().args(["detector-table", "check"]).arg(&bad)));
    assert!(e["message"].as_str().unwrap().contains("1.2"));
}

#[test]
fn usage_errors_exit_nonzero() {
    let out = run(bin().arg("simulate"));
    assert!(!out.status.success());
    let out = run(bin().arg("--help"));
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("DECOY_AOI_SEED"));
}
