use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn simulate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn run(dir: &TempDir, sub: &str, json: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = write_config(dir.path(), &format!("{sub}.json"), json);
    let prefix = dir.path().join("out").join(sub);
    let mut args = vec![
        sub,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        prefix.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    (simulate(&args), prefix)
}

fn read(prefix: &Path, suffix: &str) -> String {
    fs::read_to_string(format!("{}{suffix}", prefix.display())).unwrap()
}

#[test]
fn single_run_writes_all_files() {
    let dir = TempDir::new().unwrap();
    let (out, prefix) = run(&dir, "single-run", r#"{"kind": "single_run", "N": 4, "t_max": 6}"#, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&prefix, ".csv");
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n_sites,model,delta,anisotropy,theta,phi,outcome,t_star,probability,concurrence,werner_p,werner_residual,status"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..7], &["4", "xx", "0.8", "0", "1.57079632679", "0", "P00"]);
    assert_eq!(row[12], "ok");
    for v in &row[7..12] {
        let digits = v.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
        assert!(digits.trim_start_matches('0').len() <= 12, "{v}");
    }
    assert!(read(&prefix, ".gp").contains("single-run.csv"));
    let meta: serde_json::Value = serde_json::from_str(&read(&prefix, ".meta.json")).unwrap();
    assert_eq!(meta["kind"], "single_run");
    assert_eq!(meta["failed"], 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("single_run n_sites=4"));
}

#[test]
fn dry_run_prints_defaults_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let (out, prefix) = run(&dir, "xxz-delta-scan", "{}", &["--dry-run"]);
    assert_eq!(out.status.code(), Some(0));
    let cfg: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cfg["delta"], 0.75);
    assert_eq!(cfg["degeneracy_policy"], "lowest_magnetization");
    assert_eq!(cfg["anisotropy_grid"].as_array().unwrap().len(), 9);
    assert!(!Path::new(&format!("{}.csv", prefix.display())).exists());
}

#[test]
fn config_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    for (sub, json) in [
        ("single-run", r#"{"N": 7}"#),
        ("single-run", r#"{"N": 8,"#),
        ("single-run", r#"{"N": 8, "colour": "red"}"#),
        ("single-run", r#"{"kind": "theta_delta_map"}"#),
        (
            "theta-delta-map",
            r#"{"theta_grid": {"start": 0, "stop": 1, "step": 0}}"#,
        ),
        ("baseline-compare-xx", r#"{"n_sites_grid": [14]}"#),
    ] {
        let (out, _) = run(&dir, sub, json, &["--dry-run"]);
        assert_eq!(out.status.code(), Some(1), "{json}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
    let out = simulate(&["single-run", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_points_are_rows_and_exit_two() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"N": 4, "anisotropy_grid": [-2, 0.5], "degeneracy_policy": "strict", "t_max": 4}"#;
    let (out, prefix) = run(&dir, "xxz-delta-scan", json, &[]);
    assert_eq!(out.status.code(), Some(2));
    let csv = read(&prefix, ".csv");
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows[0], "-2,,,,degenerate_ground_state");
    assert!(rows[1].ends_with(",ok"));
}

#[test]
fn flags_override_config() {
    let dir = TempDir::new().unwrap();
    let (out, prefix) = run(
        &dir,
        "single-run",
        r#"{"N": 8, "delta": 0.3}"#,
        &[
            "--n-sites",
            "4",
            "--delta",
            "0.5",
            "--theta",
            "pi/4",
            "--t-max",
            "3",
            "--outcome",
            "P11",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = read(&prefix, ".csv");
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..7], &["4", "xx", "0.5", "0", "0.785398163397", "0", "P11"]);
}

#[test]
fn every_kind_runs() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (
            "theta-delta-map",
            r#"{"N": 4, "theta_grid": ["pi/4", "pi/2"], "delta_grid": [0.5, 0.8], "t_max": 4}"#,
            5,
        ),
        ("projection-compare", r#"{"N": 4, "t_max": 4}"#, 5),
        ("baseline-compare-xx", r#"{"n_sites_grid": [4], "t_max": 4}"#, 4),
        (
            "baseline-compare-xxz",
            r#"{"n_sites_grid": [4], "t_max": 4, "baseline_variants": ["dimerized"]}"#,
            3,
        ),
        (
            "xxz-delta-scan",
            r#"{"N": 4, "anisotropy_grid": [0, 1], "t_max": 4}"#,
            3,
        ),
        (
            "freefermion-check",
            r#"{"n_sites_grid": {"start": 3, "stop": 4, "step": 1}, "delta_grid": [0.8]}"#,
            4,
        ),
    ];
    for (sub, json, lines) in cases {
        let (out, prefix) = run(&dir, sub, json, &["--threads", "2"]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{sub}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let csv = read(&prefix, ".csv");
        assert_eq!(csv.lines().count(), lines, "{sub}");
        assert!(csv.lines().skip(1).all(|l| l.ends_with(",ok")), "{sub}\n{csv}");
        assert!(read(&prefix, ".gp").starts_with("set datafile separator ','"));
    }
}

#[test]
fn output_is_identical_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let json =
        r#"{"N": 4, "theta_grid": {"start": 0, "stop": "pi", "step": "pi/4"}, "delta_grid": [0.3, 0.8], "t_max": 6}"#;
    let bodies: Vec<String> = ["1", "4", "4"]
        .iter()
        .map(|t| {
            let (out, prefix) = run(&dir, "theta-delta-map", json, &["--threads", t]);
            assert_eq!(out.status.code(), Some(0));
            read(&prefix, ".csv")
        })
        .collect();
    assert_eq!(bodies[0], bodies[1]);
    assert_eq!(bodies[1], bodies[2]);
}
