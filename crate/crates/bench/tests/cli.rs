use std::process::Command;

use podnewton::export::{read_binary, read_csv};
use podnewton_bench::read_rows;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_podnewton"))
}

fn scenarios() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

#[test]
fn dry_run_prints_the_plan_only() {
    let out = bin().args(["bench", "--dry-run"]).arg(scenarios().join("bench_desk.json")).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.contains("1200      80    15    4800"));
    let out = bin().args(["bench", "--dry-run", "--full-scale"]).arg(scenarios().join("bench_desk.json")).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.contains("13200     220    60   52800"));
}

#[test]
fn simulate_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("s.json"),
        r#"{"grid": {"nx": 3, "ny": 2}, "time": {"segments": [{"steps": 6, "dt_days": 0.1}]}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["simulate", "--method", "newton", "--seed", "4", "--out"])
        .arg(&out)
        .arg(dir.path().join("s.json"))
        .status()
        .unwrap();
    assert!(status.success());
    let traj = read_binary(std::fs::File::open(out.join("trajectory.bin")).unwrap()).unwrap();
    let (times, traj_csv) = read_csv(std::fs::File::open(out.join("trajectory.csv")).unwrap()).unwrap();
    assert_eq!((traj.len(), traj[0].len(), times.len()), (7, 24, 7));
    assert_eq!(traj, traj_csv);
    let rows = read_rows(std::fs::File::open(out.join("results.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].full_solves, rows[0].iterations);
    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["scenario"]["field"]["seed"], 4);
    assert_eq!(run["settings"]["method"], "newton");
    assert_eq!(std::fs::read_to_string(out.join("steps.csv")).unwrap().lines().count(), 7);
}

#[test]
fn bench_writes_results_and_speedup() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("spec.json"),
        r#"{"sizes": [2, 4], "rows": 2, "time": {"segments": [{"steps": 4, "dt_days": 0.1}]}, "out": "res"}"#,
    )
    .unwrap();
    let status = bin().arg("bench").arg(dir.path().join("spec.json")).status().unwrap();
    assert!(status.success());
    let res = dir.path().join("res");
    let rows = read_rows(std::fs::File::open(res.join("results.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    let speedup = std::fs::read_to_string(res.join("speedup.csv")).unwrap();
    assert_eq!(speedup.lines().count(), 5);
    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(res.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["points"].as_array().unwrap().len(), 2);
}

#[test]
fn failures_exit_nonzero_with_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["simulate", "missing.json", "--out"]).arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "scenario");
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("error.json")).unwrap()).unwrap();
    assert_eq!(written, err);

    std::fs::write(dir.path().join("spec.json"), r#"{"sizes": [100], "rows": 15}"#).unwrap();
    let out = bin().args(["bench", "--out"]).arg(dir.path()).arg(dir.path().join("spec.json")).output().unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "invalid_spec");
}

#[test]
fn shipped_scenarios_parse() {
    for name in ["co2_injection_300.json", "minimal_10x10.json"] {
        let (s, _) = podnewton_reservoir::Scenario::load(&scenarios().join(name)).unwrap();
        assert!(s.cell_count() > 0);
    }
    for name in ["bench_desk.json", "bench_full_scale.json"] {
        let (spec, _) = podnewton_bench::BenchmarkSpec::load(&scenarios().join(name)).unwrap();
        spec.validate().unwrap();
    }
}
