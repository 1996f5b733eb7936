use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lpdg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpdg")).args(args).output().expect("spawn lpdg")
}

fn run_in(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["run", "--out-dir", out];
    args.extend_from_slice(extra);
    lpdg(&args)
}

#[test]
fn run_writes_solution_monitor_and_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["--case", "manufactured", "--p", "2", "--n-elem", "8", "--t-end", "0.2", "--monitors"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let sol = fs::read_to_string(tmp.path().join("solution.csv")).unwrap();
    let mut lines = sol.lines();
    assert_eq!(lines.next(), Some("x,rho,u"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 8 * 3);
    for r in &rows {
        assert!((r[2] - 1.0).abs() < 5e-2, "velocity stays near 1: {r:?}");
        assert!(r[1] > 0.7 && r[1] < 1.3);
    }

    let mon = fs::read_to_string(tmp.path().join("monitor.csv")).unwrap();
    assert!(mon.lines().next().unwrap().contains("violations"));
    assert!(mon.lines().count() > 1);

    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["case"], "manufactured");
    assert_eq!(meta["p"], 2);
    assert_eq!(meta["n_elem"], 8);
    assert!(meta["monitor_violations"].is_u64());
    assert!(meta["density_error"]["l1"].as_f64().unwrap() < 1e-3);
    assert_eq!(meta["a_history"].as_array().unwrap().len(), meta["steps"].as_u64().unwrap() as usize);
}

#[test]
fn runs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--case", "RP1", "--p", "1", "--n-elem", "40", "--t-end", "0.05"];
    assert!(run_in(a.path(), &args).status.success());
    assert!(run_in(b.path(), &args).status.success());
    for f in ["solution.csv", "monitor.csv", "metadata.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn mesh_list_gets_one_directory_per_mesh() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["--case", "uniform", "--n-elem", "4,6", "--t-end", "0.1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("n4/solution.csv").exists());
    assert!(tmp.path().join("n6/metadata.json").exists());
}

#[test]
fn convergence_table_and_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = lpdg(&["convergence", "--case", "manufactured", "--p", "1", "--n-elem", "8,16", "--t-end", "0.5", "--out-dir", dir]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("1/16"));
    let csv = fs::read_to_string(tmp.path().join("convergence.csv")).unwrap();
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    let order: f64 = last[3].parse().unwrap();
    assert!(order > 1.5 && order < 2.8, "observed order {order}");
    assert!(tmp.path().join("convergence.txt").exists());
}

#[test]
fn convergence_needs_two_meshes_and_an_exact_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = lpdg(&["convergence", "--case", "manufactured", "--n-elem", "8", "--out-dir", dir]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least two meshes"));
    let out = lpdg(&["convergence", "--case", "advection", "--n-elem", "8,16", "--out-dir", dir]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no exact solution"));
}

#[test]
fn config_file_and_bad_input() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "case = \"RP4\"\np = 1\nn_elem = 20\nt_end = 0.01\n").unwrap();
    let out_dir = tmp.path().join("out");
    let out = lpdg(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["case"], "RP4");
    assert_eq!(meta["n_elem"], 20);

    fs::write(&cfg, "case = \"RP4\"\nunknown_key = 3\n").unwrap();
    let out = lpdg(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = run_in(tmp.path(), &["--case", "RP1", "--cfl", "2"]);
    assert!(!out.status.success());
}
