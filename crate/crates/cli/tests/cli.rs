use std::path::Path;
use std::process::{Command, Output};

fn homoclinic(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homoclinic"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn audit_of_example1_reports_the_forcing_violation() {
    let dir = tempfile::tempdir().unwrap();
    let out = homoclinic(&["--problem", "example1", "--mode", "audit"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let report = json(&dir.path().join("example1_audit.json"));
    let c5 = report["conditions"].as_array().unwrap().iter().find(|c| c["condition"] == "C5").unwrap();
    assert_eq!(c5["status"], "fail");
    assert!((report["constants"]["M"].as_f64().unwrap() - 0.3).abs() < 1e-9);
    assert!(dir.path().join("manifest.json").is_file());
}

#[test]
fn audit_of_the_compliant_problem_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = homoclinic(&["--problem", "example1_compliant", "--mode", "audit"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn solve_writes_trajectory_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = homoclinic(&["--problem", "example1_compliant", "--mode", "solve", "--k", "5", "--emit-svg"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("example1_compliant_k5.json"));
    assert_eq!(report["nodes"], 320);
    assert_eq!(report["critical"]["converged"], true);
    assert!(report["critical"]["residual_sup"].as_f64().unwrap() <= 1e-8);
    assert_eq!(report["bracket"]["within"], true);
    let csv = std::fs::read_to_string(dir.path().join("example1_compliant_k5.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# k="));
    assert_eq!(lines.next().unwrap(), "t,q_1,dq_1,ddq_1");
    assert_eq!(lines.count(), 320);
    let svg = std::fs::read_to_string(dir.path().join("example1_compliant_k5.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn sweep_without_a_ladder_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = homoclinic(&["--problem", "example1_compliant", "--mode", "sweep"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn unknown_problem_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = homoclinic(&["--problem", "nonesuch", "--mode", "audit"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonesuch"));
}

#[test]
fn problem_definition_file_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let def = dir.path().join("quartic.toml");
    std::fs::write(
        &def,
        "label = \"quartic\"\nmu = 4\na = \"0.3\"\nG = \"q^4\"\n",
    )
    .unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("problem = {:?}\nmode = \"sweep\"\nladder = [3, 6]\n", def.to_str().unwrap())).unwrap();
    let out = homoclinic(&["--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(matches!(out.status.code(), Some(0) | Some(4)), "{stderr}");
    let report = json(&dir.path().join("out/quartic_sweep.json"));
    assert_eq!(report["problem"], "quartic");
    assert_eq!(report["within_hypotheses"], false);
}

#[test]
fn sweep_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--problem", "example1_compliant", "--mode", "sweep", "--ladder", "5,10", "--emit-svg"];
    homoclinic(&args, &dir.path().join("a"));
    homoclinic(&args, &dir.path().join("b"));
    for name in ["manifest.json", "example1_compliant_sweep.json", "example1_compliant_k10.csv", "example1_compliant_k10.svg"] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}
