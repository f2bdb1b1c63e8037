use std::path::Path;
use std::process::{Command, Output};

fn lbw_dd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lbw-dd")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

const SMALL: &str = r#"
name = "small"

[geometry]
cells = [4, 4, 4]

[time]
total = 2e-3
"#;

#[test]
fn verify_passes_on_a_clean_build() {
    let out = lbw_dd(&["verify"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn malformed_config_exits_with_a_located_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "name = \"x\"\n[time]\ndt = -\n");
    let out_dir = dir.path().join("out");
    let out = lbw_dd(&["run", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("scenario.toml:3:"), "{stderr}");
}

#[test]
fn single_subdomain_run_needs_one_gmres_iteration_per_solve() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &format!("{SMALL}\n[decomposition]\ngrid = [1, 1, 1]\n"));
    let out_dir = dir.path().join("out");
    let out = lbw_dd(&["run", "--config", &config, "--out", out_dir.to_str().unwrap(), "--dump-fields", "--threads", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "step,time,newton_iters,gmres_iters_mean,coarse_dim,t_assemble,t_pc,t_solve");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[3] == "1"));
    assert!(out_dir.join("report.json").exists());
    assert!(out_dir.join("fields_0002.vtk").exists());
}

#[test]
fn compare_writes_one_row_per_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &format!("{SMALL}\n[compare]\nlabels = [\"GDSW*(T+R)-RGDSW\", \"one-level\"]\nrecycle = [\"rebuild-all\"]\n"),
    );
    let out_dir = dir.path().join("out");
    let out = lbw_dd(&["compare", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("compare_iterations.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "preconditioner,recycle,coarse_dim,it_gmres,it_newton,failed");
    assert!(lines[1].starts_with("GDSW*(T+R)-RGDSW,rebuild-all,"));
    assert!(lines[2].starts_with("one-level,rebuild-all,0,"));
    assert!(out_dir.join("compare.csv").exists() && out_dir.join("compare.json").exists());
}
