//! End-to-end tests of the compiled binary: exit codes, output formats and
//! run-to-run determinism.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_fermi-causality");

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("FERMI_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const SINGLE_FREE_PRECURSOR: &str = r#"
[params]
omega0 = 1.0
r = 2.0
lambda = 1.0
tau0 = 0.0
tau = 1.0
sigma2 = 0.0
"#;

#[test]
fn single_free_precursor_has_zero_delta_part() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("run.json");
    write(&cfg, SINGLE_FREE_PRECURSOR);
    let o = run(
        &["single", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["results"].as_array().unwrap().len(), 3);
    let s1 = &doc["results"][0];
    assert_eq!(s1["scenario"], "phi_f");
    assert_eq!(s1["regime"], "precursor");
    let entries = s1["breakdown"]["entries"].as_array().unwrap();
    let delta = entries.iter().find(|e| e["label"] == "free_delta_part").unwrap();
    assert_eq!(delta["value"][0], 0.0);
    assert_eq!(delta["value"][1], 0.0);
    assert!(doc["diagnostics"]["precursor_probability"].as_f64().unwrap() > 0.0);
}

#[test]
fn single_timelike_has_nonzero_delta_part() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("run.json");
    write(
        &cfg,
        r#"
scenarios = [1]

[params]
omega0 = 1.0
r = 1.0
lambda = 1.0
tau0 = 0.0
tau = 2.0
sigma2 = 0.0
"#,
    );
    let o = run(
        &["single", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert!(o.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let entries = doc["results"][0]["breakdown"]["entries"].as_array().unwrap();
    let delta = entries.iter().find(|e| e["label"] == "free_delta_part").unwrap();
    assert!(delta["value"][0].as_f64().unwrap().abs() > 1e-3);
    assert_eq!(doc["results"][0]["regime"], "timelike");
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    let out = dir.path().join("out.json");
    write(&cfg, "[params]\nomega0 = \"not a number\"\n");
    let o = run(
        &["single", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn invalid_params_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    let out = dir.path().join("out.json");
    write(
        &cfg,
        r#"
[params]
omega0 = 1.0
r = -2.0
lambda = 1.0
tau0 = 0.0
tau = 1.0
sigma2 = 0.0
"#,
    );
    let o = run(
        &["single", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_verify_suite_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("rep.json");
    let o = run(&["verify", "--suite", "nope", "--report", rep.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
}

const SWEEP_CFG: &str = r#"
scenarios = [1, 2, 3]

[fixed]
omega0 = 1.0
r = 2.0
dtau = 1.0
sigma2 = 0.1

[axes.r]
list = [2.0, 3.0]

[axes.sigma2]
geometric = { start = 0.1, stop = 1.0, count = 3 }
"#;

#[test]
fn sweep_is_deterministic_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    write(&cfg, SWEEP_CFG);
    let mut outputs = Vec::new();
    for (name, extra_args, envs) in [
        ("a.csv", vec![], vec![]),
        ("b.csv", vec![], vec![]),
        ("c.csv", vec!["--threads", "1"], vec![]),
        ("d.csv", vec!["--threads", "3"], vec![]),
        ("e.csv", vec![], vec![("FERMI_THREADS", "2")]),
    ] {
        let out = dir.path().join(name);
        let mut args =
            vec!["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend(extra_args);
        let o = run(&args, &envs);
        assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(&out).unwrap());
    }
    for other in &outputs[1..] {
        assert_eq!(&outputs[0], other, "sweep output not byte-identical");
    }
}

#[test]
fn sweep_single_point_matches_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let sweep_cfg = dir.path().join("sweep.toml");
    write(
        &sweep_cfg,
        r#"
scenarios = [1]

[fixed]
omega0 = 2.0
r = 1.5
dtau = 1.0
sigma2 = 0.2

[axes.r]
list = [1.5]
"#,
    );
    let csv_out = dir.path().join("sweep.csv");
    let o = run(
        &["sweep", "--config", sweep_cfg.to_str().unwrap(), "--out", csv_out.to_str().unwrap()],
        &[],
    );
    assert!(o.status.success());

    let single_cfg = dir.path().join("single.toml");
    write(
        &single_cfg,
        r#"
scenarios = [1]

[params]
omega0 = 2.0
r = 1.5
lambda = 1.0
tau0 = 0.0
tau = 1.0
sigma2 = 0.2
"#,
    );
    let json_out = dir.path().join("single.json");
    let o = run(
        &["single", "--config", single_cfg.to_str().unwrap(), "--out", json_out.to_str().unwrap()],
        &[],
    );
    assert!(o.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_out).unwrap()).unwrap();
    let entries = doc["results"][0]["breakdown"]["entries"].as_array().unwrap();

    let csv = std::fs::read_to_string(&csv_out).unwrap();
    let mut rows = csv.lines();
    let header: Vec<&str> = rows.next().unwrap().split(',').collect();
    assert_eq!(
        header,
        ["omega0", "r", "sigma2", "dtau", "scenario", "term", "re", "im", "err_est", "regime", "status"]
    );
    let mut matched = 0;
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[4], "phi_f");
        assert_eq!(f[10], "ok");
        let entry = entries.iter().find(|e| e["label"] == f[5]).unwrap();
        assert_eq!(f[6].parse::<f64>().unwrap(), entry["value"][0].as_f64().unwrap());
        assert_eq!(f[7].parse::<f64>().unwrap(), entry["value"][1].as_f64().unwrap());
        matched += 1;
    }
    assert!(matched >= 4);
}

#[test]
fn verify_quadrature_suite_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("report.json");
    let o = run(&["verify", "--suite", "quadrature", "--report", rep.to_str().unwrap()], &[]);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(doc["all_passed"], true);
    assert_eq!(doc["checks"].as_array().unwrap().len(), 3);
}
