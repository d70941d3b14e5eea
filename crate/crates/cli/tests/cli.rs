use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, config: &str, out: &str) -> Output {
    let path = dir.join(format!("{out}.toml"));
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_tori"))
        .arg("--config")
        .arg(&path)
        .arg("--output")
        .arg(dir.join(out))
        .output()
        .unwrap()
}

fn read(dir: &Path, out: &str, file: &str) -> String {
    let path: PathBuf = dir.join(out).join(file);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn json(dir: &Path, out: &str, file: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, out, file)).unwrap()
}

#[test]
fn nondeg_on_isotropic_momentum() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        tmp.path(),
        "command = \"nondeg\"\nalpha = [1, 0]\n[system]\nname = \"isotropic_momentum\"\n",
        "n",
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let res = json(tmp.path(), "n", "criterion.json");
    assert_eq!(res["nondegenerate"], true);
    let margin = res["margin"].as_f64().unwrap();
    assert!((margin - (1.0 - 2f64.sqrt() / 2.0)).abs() < 1e-12);
    assert!((res["q"][0].as_f64().unwrap() - 2f64.sqrt() / 2.0).abs() < 1e-12);
}

#[test]
fn nondeg_search_without_a_cycle() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        tmp.path(),
        "command = \"nondeg\"\n[system]\nname = \"lyapunov\"\nnu = 2.0\n",
        "n",
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        json(tmp.path(), "n", "criterion.json")["nondegenerate"],
        false
    );
}

#[test]
fn floquet_on_a_resonant_torus_fails() {
    let tmp = TempDir::new().unwrap();
    let cfg = "command = \"floquet\"\n[system]\nname = \"action_oscillators\"\nomega = [1.0, 1.4142135623730951, 2.0]\n";
    let out = run(tmp.path(), cfg, "f");
    assert_eq!(out.status.code(), Some(1));
    let csv = read(tmp.path(), "f", "multipliers.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,re,im,abs_minus_one"));
    assert_eq!(lines.count(), 6);
    let rep = json(tmp.path(), "f", "monodromy.json");
    assert_eq!(rep["hypothesis_iii"]["unit_multiplicity"], 6);
    assert_eq!(rep["hypothesis_iii"]["pass"], false);
}

#[test]
fn floquet_on_system_c() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        tmp.path(),
        "command = \"floquet\"\n[system]\nname = \"isotropic_momentum\"\n",
        "f",
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = read(tmp.path(), "f", "multipliers.csv");
    let near_one = csv
        .lines()
        .skip(1)
        .filter(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap() < 1e-6)
        .count();
    assert_eq!(near_one, 4);
}

#[test]
fn check_writes_one_report_per_parameter() {
    let tmp = TempDir::new().unwrap();
    let cfg = "command = \"check\"\neps_grid = [0.0, 0.05, 0.1]\n[system]\nname = \"action_oscillators\"\nn = 2\ns = 1\n";
    let out = run(tmp.path(), cfg, "c");
    assert_eq!(out.status.code(), Some(0));
    let rep = json(tmp.path(), "c", "hypotheses.json");
    assert_eq!(rep["reports"].as_array().unwrap().len(), 3);
    let log = read(tmp.path(), "c", "run.log");
    assert!(log.contains(cfg), "config is echoed in the log header");
}

#[test]
fn continue_writes_family_and_samples() {
    let tmp = TempDir::new().unwrap();
    let cfg =
        "command = \"continue\"\neps_grid = [0.0, 0.05]\n[system]\nname = \"isotropic_momentum\"\n\
               [beta_grid]\ncount = [2, 1]\n[sampling]\ngrid_per_cycle = 4\n";
    let out = run(tmp.path(), cfg, "k");
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let family = read(tmp.path(), "k", "family.csv");
    let mut lines = family.lines();
    assert_eq!(
        lines.next(),
        Some("beta_1,beta_2,eps,y_norm,residual,freq_1,freq_2,converged,unit_multiplicity")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows
        .iter()
        .all(|r| r.len() == 9 && r[7] == "1" && r[8] == "4"));
    // The perturbation moves the transverse fixed point off zero.
    assert!(rows
        .iter()
        .any(|r| r[2] == "0.05" && r[3].parse::<f64>().unwrap() > 0.0));

    let samples = read(tmp.path(), "k", "torus_samples.csv");
    let mut lines = samples.lines();
    assert_eq!(
        lines.next(),
        Some("record_id,theta_1,theta_2,x_1,x_2,x_3,x_4,x_5,x_6,F_dev_max")
    );
    assert_eq!(lines.count(), 4 * 16);
}

#[test]
fn outputs_are_reproducible() {
    let tmp = TempDir::new().unwrap();
    let cfg = "command = \"continue\"\neps_grid = [0.02]\n[system]\nname = \"lyapunov\"\n\
               [beta_grid]\ncount = [3]\n[sampling]\ngrid_per_cycle = 8\n";
    for out in ["a", "b"] {
        assert_eq!(run(tmp.path(), cfg, out).status.code(), Some(0));
    }
    for file in ["family.csv", "torus_samples.csv"] {
        assert_eq!(read(tmp.path(), "a", file), read(tmp.path(), "b", file));
    }
}

#[test]
fn freq_reports_twist() {
    let tmp = TempDir::new().unwrap();
    let cfg = "command = \"freq\"\neps_grid = [0.1]\n[system]\nname = \"action_oscillators\"\n\
               [beta_grid]\nstep = [0.02, 0.02]\ncount = [3, 3]\n";
    let out = run(tmp.path(), cfg, "t");
    assert_eq!(out.status.code(), Some(0));
    let rep = json(tmp.path(), "t", "twist.json");
    let det = rep["entries"][0]["det"].as_f64().unwrap();
    assert!((det - 0.04).abs() < 0.004);

    let flat = cfg.replace("[0.1]", "[0.0]");
    assert_eq!(run(tmp.path(), &flat, "u").status.code(), Some(1));
    assert_eq!(json(tmp.path(), "u", "twist.json")["degenerate"], true);
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let empty = "command = \"continue\"\n[system]\nname = \"lyapunov\"\n[beta_grid]\ncount = [0]\n";
    let out = run(tmp.path(), empty, "e");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta_grid"));

    let bad =
        "command = \"floquet\"\n[system]\nname = \"lyapunov\"\n[tolerances]\ntol_unit = -1.0\n";
    let out = run(tmp.path(), bad, "b");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerances.tol_unit"));
}

#[test]
fn numerical_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    // One node only: no central differences are possible.
    let cfg = "command = \"freq\"\neps_grid = [0.1]\n[system]\nname = \"action_oscillators\"\n";
    let out = run(tmp.path(), cfg, "g");
    assert_eq!(out.status.code(), Some(2));
    assert!(read(tmp.path(), "g", "run.log").contains("error"));
}
