use std::fs;
use std::process::{Command, Output};

use wg_elasticity::mesh::{export_mesh, triangle_mesh};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wg-elast")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn convergence_table_has_one_row_per_level_and_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1.csv");
    let o = run(&[
        "convergence",
        "--case",
        "2d",
        "--k",
        "0",
        "--lambda",
        "1,1e3,1e6",
        "--levels",
        "2..7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "case,k,lambda,level,dofs,err_u,rate_u,err_sigma,rate_sigma,err_gradu,rate_gradu");
    assert_eq!(lines.len(), 19);
    let dofs: Vec<&str> = lines[1..7].iter().map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(dofs, ["75", "243", "867", "3267", "12675", "49923"]);
}

#[test]
fn identical_configurations_give_identical_bytes() {
    let args = ["convergence", "--k", "1", "--lambda", "1,1e6", "--levels", "4,8"];
    let a = run(&args);
    let b = run(&[&args[..], &["--jobs", "1"]].concat());
    let c = Command::new(env!("CARGO_BIN_EXE_wg-elast")).args(args).env("WG_ELAST_JOBS", "3").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.toml");
    fs::write(&cfg, "case = \"2d\"\nk = 0\nlambda = [1.0, 1e3]\nlevels = \"2..3\"\n").unwrap();
    let a = run(&["convergence", "--config", cfg.to_str().unwrap()]);
    let b = run(&["convergence", "--lambda", "1,1e3", "--levels", "4,8"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    // Flags override the file.
    let c = run(&["convergence", "--config", cfg.to_str().unwrap(), "--lambda", "1"]);
    assert_eq!(stdout(&c).lines().count(), 3);
}

#[test]
fn unknown_config_keys_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "lamda = [1.0]\n").unwrap();
    let o = run(&["convergence", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_assertions_exit_with_two() {
    // Two coarse levels are far from the asymptotic displacement rate.
    let o = run(&["convergence", "--levels", "2..3", "--assert"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rate_u"));
    let o = run(&["convergence", "--k", "1", "--levels", "3..4", "--assert", "--rate-tol", "0.3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn errors_exit_with_one() {
    assert_eq!(run(&["convergence", "--levels", "8,4"]).status.code(), Some(1));
    assert_eq!(run(&["convergence", "--levels", "2..12", "--dof-budget", "1000"]).status.code(), Some(1));
    assert_eq!(run(&["convergence", "--lambda=-1"]).status.code(), Some(1));
    assert_eq!(run(&["check-mesh", "--file", "/nonexistent.wgmesh"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--case", "3d", "--family", "triangle"]).status.code(), Some(1));
    // Usage errors come from the argument parser.
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn check_mesh_reports_regularity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.wgmesh");
    fs::write(&path, export_mesh(&triangle_mesh(4).unwrap())).unwrap();
    let o = run(&["check-mesh", "--file", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("cells: 32"));
    assert!(text.contains("flagged cells (threshold 0.01): 0"));
    assert!(text.contains("min ell"));
}

#[test]
fn solve_from_a_mesh_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.wgmesh");
    fs::write(&path, export_mesh(&triangle_mesh(4).unwrap())).unwrap();
    let from_file = run(&["solve", "--mesh", path.to_str().unwrap(), "--lambda", "1e3"]);
    let generated = run(&["solve", "--n", "4", "--lambda", "1e3"]);
    assert!(from_file.status.success());
    let row = |o: &Output| stdout(o).lines().nth(1).unwrap().split(',').skip(4).take(6).collect::<Vec<_>>().join(",");
    assert_eq!(row(&from_file), row(&generated));
}

#[test]
fn selftest_reports_counts() {
    let o = run(&["selftest"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    assert!(last.ends_with("passed, 0 failed"), "{last}");
}
