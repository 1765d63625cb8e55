use std::process::Command;

fn bench() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sfvem-bench"));
    cmd.env("RUST_LOG", "warn");
    cmd
}

#[test]
fn small_box_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = bench()
        .args(["--problem", "box-self-contact", "--refinement", "0", "--steps", "2", "--uy", "-0.01", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "step,factor,iters,gap,reaction_x,reaction_y");
    for step in 0..=2 {
        let vtk = std::fs::read_to_string(out.join(format!("step_{step:04}.vtk"))).unwrap();
        assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
        assert!(vtk.contains("VECTORS displacement double"));
    }
    let cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(cfg["load"]["n_steps"], 2);
    assert_eq!(cfg["load"]["targets"]["top-load-band"][1], -0.01);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let dumped = bench().args(["--problem", "c-box", "--dump-config"]).output().unwrap();
    assert!(dumped.status.success());
    let path = dir.path().join("c.json");
    std::fs::write(&path, &dumped.stdout).unwrap();
    let out = bench()
        .arg("--config")
        .arg(&path)
        .args(["--gamma", "2e-5", "--reg", "tan-rot-j", "--dump-config"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let cfg: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cfg["problem"], "c-box");
    assert_eq!(cfg["medium"]["gamma"], 2e-5);
    assert_eq!(cfg["medium"]["reg"], "tan-rot-j");
}

#[test]
fn configuration_errors_exit_with_one() {
    assert_eq!(bench().args(["--problem", "no-such-problem"]).status().unwrap().code(), Some(1));
    assert_eq!(bench().args(["--reg", "bogus"]).status().unwrap().code(), Some(1));
    assert_eq!(bench().args(["--gamma", "-1", "--refinement", "0"]).status().unwrap().code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(&grid, r#"{"gamma": [], "alpha_r": [1.0]}"#).unwrap();
    assert_eq!(bench().arg("--sweep").arg(&grid).status().unwrap().code(), Some(1));
}

#[test]
fn collapse_without_adjustment_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let status = bench()
        .args(["--refinement", "0", "--steps", "1", "--uy", "-5", "--no-auto-adjust", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn list_presets() {
    let out = bench().arg("--list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "punch-rigid"));
}
