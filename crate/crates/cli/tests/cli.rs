use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twolayer-qg"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const PARAMS: &str = r#"{"beta": 0.1, "kappa_T": 1e-6, "kappa_M": 1e-6, "nu": 1e-6, "m": 3, "L": 8.029}"#;

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

#[test]
fn linstab_flags_the_argmax_row() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", PARAMS);
    let out = run(&["linstab", "--params", &p, "--K", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k1,k2,re_lambda_max,im_lambda_max,disc_re,alpha_k,gamma_k,argmax");
    let flagged: Vec<&str> = lines.filter(|l| l.ends_with(",1")).collect();
    assert_eq!(flagged.len(), 1);
    assert!(flagged[0].starts_with("1,0,"), "{}", flagged[0]);
    assert_eq!(text.lines().count(), 1 + 81 - 1);
}

#[test]
fn bounds_prints_the_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", r#"{"beta": 0, "kappa_T": 1, "kappa_M": 0, "nu": 1, "m": 3, "L": 1}"#);
    let out = run(&["bounds", "--params", &p, "--C", "1", "--C-lt", "1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["M"], 33);
    assert_eq!(v["C3"], 1.0);
    assert!(v["d"].as_u64().unwrap() >= 1);
}

#[test]
fn bounds_with_output_dir_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.json", r#"{"beta": 0, "kappa_T": 1, "kappa_M": 0, "nu": 1, "m": 3, "L": 1}"#);
    let out_dir = dir.path().join("b");
    let out = run(&["bounds", "--params", &p, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    let names: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["config.json", "ledger.json"]);
}

#[test]
fn config_errors_exit_two_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(
        dir.path(),
        "c.json",
        r#"{"model": {"beta": 0.1, "kappa_T": 0.01, "kappa_M": 0.01, "nu": 1e-4, "m": 3, "L": 0.5}, "lattice": {"K": 8}}"#,
    );
    let out = run(&["run", "--config", &c]);
    assert_eq!(out.status.code(), Some(2));
    let v = stderr_json(&out);
    assert_eq!(v["error"], "config");
    assert_eq!(v["path"], "model.L");

    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "usage");

    let out = run(&["bounds", "--params", "/nonexistent/p.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "runtime");
}

#[test]
fn blow_up_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(
        dir.path(),
        "c.json",
        &format!(
            r#"{{"model": {{"beta": 0.1, "kappa_T": 0.05, "kappa_M": 0.05, "nu": 1e-3, "m": 3, "L": 8}},
                "lattice": {{"K": 6}},
                "stepper": {{"t_end": 1, "dt": 0.05, "diagnostics_interval": 0.25, "init_amplitude": 1e9}},
                "outputs": {{"dir": "{}"}}}}"#,
            dir.path().join("out").display()
        ),
    );
    let out = run(&["run", "--config", &c]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "blow-up");
    assert!(dir.path().join("out/manifest.json").exists());
}

#[test]
fn identical_runs_give_identical_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let config = |sub: &str| {
        format!(
            r#"{{"model": {{"beta": 0.1, "kappa_T": 0.05, "kappa_M": 0.05, "nu": 1e-3, "m": 3, "L": 8}},
                "lattice": {{"K": 8}},
                "stepper": {{"t_end": 2, "dt": 0.02, "diagnostics_interval": 0.1, "seed": 5, "init_amplitude": 0.1}},
                "outputs": {{"dir": "{}", "snapshot_format": "none"}}}}"#,
            dir.path().join(sub).display()
        )
    };
    for sub in ["a", "b"] {
        let c = write(dir.path(), &format!("{sub}.json"), &config(sub));
        let out = run(&["run", "--config", &c]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.path().join("a/diagnostics.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/diagnostics.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 22);
}

#[test]
fn lt_check_reports_json() {
    let out = run(&["lt-check", "--K", "4", "--max-size", "3", "--trials", "3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["sizes"].as_array().unwrap().len(), 3);
    assert!(v["max_ratio"].as_f64().unwrap() > 0.0);
}
