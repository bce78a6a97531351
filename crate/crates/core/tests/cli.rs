//! End-to-end checks of the `regsmc` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn regsmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regsmc"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = regsmc(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_daily_writes_preset_parameters() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "simulate",
        "--label",
        "daily",
        "--seed",
        "3",
        "--out",
        p(dir.path()),
    ]);
    let meta = json(&dir.path().join("dataset.meta.json"));
    assert_eq!(meta["alpha"], 0.0);
    assert_eq!(meta["phi"], 0.99);
    assert_eq!(meta["sigma2"], 0.01);
    assert_eq!(meta["T"], 1500);
    assert_eq!(meta["seed"], 3);
    let csv = std::fs::read_to_string(dir.path().join("dataset.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 1501);
}

#[test]
fn simulate_is_byte_identical_across_invocations() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        ok(&[
            "simulate",
            "--label",
            "weekly",
            "--seed",
            "7",
            "--out",
            p(d.path()),
        ]);
    }
    for f in ["dataset.csv", "dataset.meta.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn out_of_domain_parameters_exit_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = regsmc(&["simulate", "--phi", "1.5", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain"));
    assert!(!dir.path().join("dataset.csv").exists());
}

#[test]
fn zero_runs_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = regsmc(&["bench", "--runs", "0", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_dataset_file_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let out = regsmc(&["init", "--data", p(&missing), "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn apf_trace_records_particle_count() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run",
        "--label",
        "weekly",
        "--horizon",
        "150",
        "--algo",
        "APF",
        "--runs",
        "1",
        "--particles",
        "2000",
        "--out",
        p(dir.path()),
    ];
    ok(&args);
    let meta = json(&dir.path().join("run_000/trace_APF.meta.json"));
    assert_eq!(meta["particles"], 2000);
    assert_eq!(meta["algo"], "APF");
    assert_eq!(meta["steps"], 50);
    let trace = std::fs::read_to_string(dir.path().join("run_000/trace_APF.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 50);
}

#[test]
fn sis_trace_meta_records_first_ess_collapse() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run",
        "--label",
        "daily",
        "--horizon",
        "400",
        "--algo",
        "SIS",
        "--particles",
        "2000",
        "--out",
        p(dir.path()),
    ];
    ok(&args);
    let meta = json(&dir.path().join("run_000/trace_SIS.meta.json"));
    let trace = std::fs::read_to_string(dir.path().join("run_000/trace_SIS.csv")).unwrap();
    let mut lines = trace.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let (t_col, ess_col) = (0, header.iter().position(|h| *h == "ess").unwrap());
    let first = lines
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|f| f[ess_col].parse::<f64>().unwrap() < 0.01 * 2000.0)
        .map(|f| f[t_col].parse::<u64>().unwrap());
    assert_eq!(meta["ess_collapse_t"].as_u64(), first);
    assert!(first.is_some(), "plain SIS never collapsed over 300 steps");
}

#[test]
fn bench_writes_summary_and_report_regenerates() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "bench",
        "--label",
        "weekly",
        "--horizon",
        "60",
        "--init-n",
        "20",
        "--particles",
        "100",
        "--burn-in",
        "100",
        "--runs",
        "2",
        "--out",
        p(dir.path()),
    ];
    let printed = ok(&args).stdout;
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 7 * 2);
    let report_path = dir.path().join("report.txt");
    let report = std::fs::read(&report_path).unwrap();
    assert_eq!(report, printed);

    std::fs::remove_file(&report_path).unwrap();
    let again = ok(&["report", "--out", p(dir.path())]).stdout;
    assert_eq!(again, report);
    assert_eq!(std::fs::read(&report_path).unwrap(), report);
}

#[test]
fn config_file_sets_defaults_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    std::fs::write(
        &cfg,
        "# small weekly run\nlabel = weekly\nhorizon = 60\ninit_n = 20\nparticles = 300\nburn_in = 100\nalgo = SIR\n",
    )
    .unwrap();
    ok(&[
        "run",
        "--config",
        p(&cfg),
        "--particles",
        "120",
        "--out",
        p(dir.path()),
    ]);
    let meta = json(&dir.path().join("run_000/trace_SIR.meta.json"));
    assert_eq!(meta["particles"], 120);
    assert_eq!(meta["init_n"], 20);
    assert_eq!(meta["horizon"], 60);
    assert!(!dir.path().join("run_000/trace_APF.meta.json").exists());

    std::fs::write(&cfg, "no_such_option = 1\n").unwrap();
    let out = regsmc(&["run", "--config", p(&cfg), "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
}
