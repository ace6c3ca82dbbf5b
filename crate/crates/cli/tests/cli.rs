//! End-to-end tests of the command-line surface.

use std::path::PathBuf;
use std::process::Output;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_wetplan")
}

fn fresh_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wetplan-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    std::process::Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &std::path::Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

#[test]
fn grid_export_is_reproducible() {
    let d1 = fresh_dir("grid1");
    let d2 = fresh_dir("grid2");
    for d in [&d1, &d2] {
        let out = run(&["grid-export", "--out-dir", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = read(&d1, "grid.csv");
    let b = read(&d2, "grid.csv");
    assert_eq!(a, b, "grid export must be byte-identical across runs");
    assert!(a.starts_with("x,y,r,phi\n"));
    // standard grid: center point plus twelve rings totalling 1000
    assert_eq!(a.lines().count(), 1001);
}

#[test]
fn centered_benchmark_reports_closed_form_power() {
    let dir = fresh_dir("bench");
    let out = run(&[
        "optimize",
        "--solver",
        "centered-benchmark",
        "--beacons",
        "4",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&read(&dir, "report.json")).unwrap();
    assert_eq!(report["solver"], "centered-benchmark");
    let worst = report["worst_power_w"].as_f64().unwrap();
    assert!((worst - 1e-5).abs() < 1e-18, "worst = {worst}");
    for p in report["positions"].as_array().unwrap() {
        assert_eq!(p["x_m"].as_f64().unwrap(), 0.0);
        assert_eq!(p["y_m"].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn ring_sweep_places_three_beacons_on_a_ring() {
    let dir = fresh_dir("ode3");
    let out = run(&[
        "optimize",
        "--beacons",
        "3",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let positions = read(&dir, "positions.csv");
    let mut lines = positions.lines();
    assert_eq!(lines.next(), Some("b,x,y"));
    for line in lines {
        let parts: Vec<f64> = line
            .split(',')
            .skip(1)
            .map(|v| v.parse().unwrap())
            .collect();
        let radius = (parts[0] * parts[0] + parts[1] * parts[1]).sqrt();
        assert!((radius - 44.3).abs() < 0.2, "radius {radius}");
    }
}

#[test]
fn positions_csv_round_trips_against_the_report() {
    let dir = fresh_dir("roundtrip");
    let out = run(&[
        "optimize",
        "--beacons",
        "5",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&read(&dir, "report.json")).unwrap();
    let csv = read(&dir, "positions.csv");
    for (line, pos) in csv.lines().skip(1).zip(report["positions"].as_array().unwrap()) {
        let parts: Vec<&str> = line.split(',').collect();
        let x: f64 = parts[1].parse().unwrap();
        let y: f64 = parts[2].parse().unwrap();
        // shortest round-trip formatting: re-parsed CSV is bit-exact
        assert_eq!(x, pos["x_m"].as_f64().unwrap());
        assert_eq!(y, pos["y_m"].as_f64().unwrap());
    }
}

#[test]
fn ipm_runs_are_seed_deterministic() {
    let d1 = fresh_dir("ipm1");
    let d2 = fresh_dir("ipm2");
    for d in [&d1, &d2] {
        let out = run(&[
            "optimize",
            "--solver",
            "ipm",
            "--beacons",
            "2",
            "--seed",
            "5",
            "--out-dir",
            d.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(
        read(&d1, "positions.csv"),
        read(&d2, "positions.csv"),
        "same seed must give identical positions"
    );
    let a: serde_json::Value = serde_json::from_str(&read(&d1, "report.json")).unwrap();
    let b: serde_json::Value = serde_json::from_str(&read(&d2, "report.json")).unwrap();
    assert_eq!(a["worst_power_w"], b["worst_power_w"]);
    assert_eq!(a["iterations"], b["iterations"]);
}

#[test]
fn stochastic_solver_requires_a_seed() {
    let dir = fresh_dir("noseed");
    let out = run(&[
        "optimize",
        "--solver",
        "pso",
        "--beacons",
        "2",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("seed"), "stderr: {stderr}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = fresh_dir("badkey");
    let config = dir.join("config.json");
    std::fs::write(&config, r#"{"radius_km": 1.0}"#).unwrap();
    let out = run(&[
        "optimize",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("radius_km"), "stderr: {stderr}");
}

#[test]
fn manifest_captures_the_run() {
    let dir = fresh_dir("manifest");
    let out = run(&[
        "optimize",
        "--beacons",
        "1",
        "--seed",
        "7",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir, "run-manifest.json")).unwrap();
    assert_eq!(manifest["command"], "optimize");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));
    let hash = manifest["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 16);
    assert!(manifest["config"]["radius_m"].as_f64().unwrap() == 100.0);
}

#[test]
fn heatmap_export_has_the_field_header() {
    let dir = fresh_dir("heat");
    let out = run(&[
        "optimize",
        "--beacons",
        "3",
        "--heatmap",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let heat = read(&dir, "heatmap.csv");
    assert!(heat.starts_with("x,y,mean_power_watts\n"));
    assert_eq!(heat.lines().count(), 1001);
    // every value parses and is positive
    for line in heat.lines().skip(1) {
        let v: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(v > 0.0);
    }
}

#[test]
fn compare_normalizes_times_to_the_sweep() {
    let dir = fresh_dir("compare");
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        r#"{"pso_max_iters": 60, "pso_stall_iters": 30}"#,
    )
    .unwrap();
    let out = run(&[
        "compare",
        "--config",
        config.to_str().unwrap(),
        "--beacon-min",
        "1",
        "--beacon-max",
        "2",
        "--seed",
        "9",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir, "compare.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "beacons,solver,worst_power_w,worst_power_dbm,wall_ms,time_vs_sweep,converged"
    );
    // 2 beacon counts x 4 solvers
    assert_eq!(lines.len(), 1 + 8);
    for line in &lines[1..] {
        let parts: Vec<&str> = line.split(',').collect();
        if parts[1] == "ode-pobes" {
            let norm: f64 = parts[5].parse().unwrap();
            assert_eq!(norm, 1.0);
        }
        assert_eq!(parts[6], "true");
    }
}

#[test]
fn min_beacons_lax_constraint_needs_one() {
    let dir = fresh_dir("minb");
    let config = dir.join("config.json");
    std::fs::write(&config, r#"{"zeta": 0.5, "min_beacons_cap": 3}"#).unwrap();
    let out = run(&[
        "min-beacons",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "3",
        "--samples",
        "20000",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir, "min_beacons.csv");
    let row = csv.lines().nth(1).unwrap();
    let parts: Vec<&str> = row.split(',').collect();
    assert_eq!(parts[0], "0.5");
    assert_eq!(parts[3], "1");
    assert_eq!(parts[4], "true");
}

#[test]
fn coverage_single_beacon_matches_the_closed_form() {
    let dir = fresh_dir("cov");
    let config = dir.join("config.json");
    std::fs::write(&config, r#"{"coverage_beacon_list": [1]}"#).unwrap();
    let out = run(&[
        "coverage",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir, "coverage.csv");
    let parts: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let r_max: f64 = parts[2].parse().unwrap();
    let closed = (10.0f64 / 6.309573444801929e-6).powf(1.0 / 3.0);
    assert!((r_max - closed).abs() <= 0.1, "r_max {r_max} vs {closed}");
}

#[test]
fn antenna_matrix_covers_the_requested_cells() {
    let dir = fresh_dir("ant");
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        r#"{"antenna_beacon_list": [1, 2], "antenna_list": [1, 2]}"#,
    )
    .unwrap();
    let out = run(&[
        "antennas",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "4",
        "--samples",
        "20000",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir, "antennas.csv");
    assert_eq!(csv.lines().count(), 1 + 4);
    assert!(csv.starts_with("beacons,antennas,outage,ci_half_width_95,samples\n"));
}
