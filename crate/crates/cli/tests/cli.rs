use std::f64::consts::TAU;
use std::path::Path;
use std::process::{Command, Output};

use condenser_core::geometry::CondenserSpec;

fn condenser(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condenser"))
        .args(args)
        .env("CONDENSER_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn annulus_spec(dir: &Path) -> String {
    let o = condenser(dir, &["generate", "annulus"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    dir.join("custom_r0.25_1.json").to_string_lossy().into_owned()
}

#[test]
fn small_maze_is_rejected_with_a_reason() {
    let dir = tempfile::tempdir().unwrap();
    let o = condenser(dir.path(), &["generate", "square-maze", "--m", "2"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("m must be ≥ 3"), "{}", stderr(&o));
    assert!(!dir.path().join("square_maze_m2.json").exists());
}

#[test]
fn generated_specs_round_trip_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    for (args, file) in [
        (&["generate", "square-maze", "--m", "7"][..], "square_maze_m7.json"),
        (&["generate", "spiked-annulus", "--M", "16"][..], "spiked_annulus_M16.json"),
        (&["generate", "tangent-disks", "--cut", "0.01"][..], "tangent_disks_n6_rho0.6_s0.01.json"),
    ] {
        let o = condenser(dir.path(), args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let diag: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(diag["valid"], true);
        assert!(diag["clearance"].as_f64().unwrap() > 0.0);
        let text = read(&dir.path().join(file));
        let spec = CondenserSpec::from_json(&text).unwrap();
        assert_eq!(spec.to_json(), text);
    }
    let spec = CondenserSpec::from_json(&read(&dir.path().join("square_maze_m7.json"))).unwrap();
    assert_eq!(spec.params.m, Some(7));
    let spec = CondenserSpec::from_json(&read(&dir.path().join("spiked_annulus_M16.json"))).unwrap();
    assert_eq!(spec.params.spikes, Some(16));
}

#[test]
fn out_dir_flag_beats_the_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let o = condenser(env_dir.path(), &["generate", "circular-maze", "--m", "3"]);
    assert_eq!(code(&o), 0);
    assert!(env_dir.path().join("circular_maze_m3.json").exists());
    assert!(env_dir.path().join("generate-manifest.json").exists());
    let flag = flag_dir.path().to_str().unwrap();
    let o = condenser(env_dir.path(), &["--out-dir", flag, "generate", "circular-maze", "--m", "4"]);
    assert_eq!(code(&o), 0);
    assert!(flag_dir.path().join("circular_maze_m4.json").exists());
    assert!(!env_dir.path().join("circular_maze_m4.json").exists());
}

#[test]
fn qh_table_and_empty_range() {
    let dir = tempfile::tempdir().unwrap();
    let o = condenser(dir.path(), &["qh", "circular-maze", "--params", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(&dir.path().join("qh_circular_maze.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("family,param,length,perimeter,numeric_oracle,rel_discrepancy"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "5");
    let (l, p): (f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap());
    assert!((l.round() - 144.0).abs() <= 1.0 && (p.round() - 289.0).abs() <= 1.0);

    let o = condenser(dir.path(), &["qh", "square-maze", "--params", "14..7"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("empty parameter range"));
}

#[test]
fn annulus_capacity_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = annulus_spec(dir.path());
    let o = condenser(dir.path(), &["capacity", &spec]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let result: serde_json::Value = serde_json::from_str(&read(&dir.path().join("capacity_custom_r0.25_1.json"))).unwrap();
    let value = result["value"].as_f64().unwrap();
    let exact = TAU / 4f64.ln();
    assert!((value - exact).abs() / exact < 1e-4, "{value}");
    let csv = read(&dir.path().join("capacity_custom_r0.25_1.csv"));
    assert!(csv.starts_with("param,qh_length,qh_perimeter,capacity,error_exponent,dofs\nr0.25_1,,,"));

    let o = condenser(dir.path(), &["capacity", &spec, "--target", "1e-14"]);
    assert_eq!(code(&o), 2);
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("capacity-manifest.json"))).unwrap();
    assert_eq!(manifest["exit_code"], 2);

    let o = condenser(dir.path(), &["capacity", &spec, "--order", "3"]);
    assert_eq!(code(&o), 3);
    let o = condenser(dir.path(), &["capacity", &spec, "--chord-tol", "0.5"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn corrupt_or_missing_spec_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"version\": 1, \"family\": ").unwrap();
    let o = condenser(dir.path(), &["capacity", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("invalid input"), "{}", stderr(&o));
    let o = condenser(dir.path(), &["capacity", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn usage_errors_and_help() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&condenser(dir.path(), &["--help"])), 0);
    assert_eq!(code(&condenser(dir.path(), &["--version"])), 0);
    assert_eq!(code(&condenser(dir.path(), &["frobnicate"])), 3);
    assert_eq!(code(&condenser(dir.path(), &["generate", "square-maze"])), 3);
}

#[test]
fn reruns_and_replays_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let spec = annulus_spec(a.path());
    assert_eq!(code(&condenser(a.path(), &["capacity", &spec, "--levels", "3"])), 0);
    assert_eq!(code(&condenser(b.path(), &["capacity", &spec, "--levels", "3"])), 0);
    let manifest = a.path().join("capacity-manifest.json");
    let o = condenser(c.path(), &["replay", manifest.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for name in ["capacity_custom_r0.25_1.json", "capacity_custom_r0.25_1.csv"] {
        let first = read(&a.path().join(name));
        assert_eq!(first, read(&b.path().join(name)), "{name}");
        assert_eq!(first, read(&c.path().join(name)), "{name}");
    }
    let m: serde_json::Value = serde_json::from_str(&read(&manifest)).unwrap();
    assert_eq!(m["deterministic"], true);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
    assert!(m["timings"]["solve"].as_f64().unwrap() > 0.0);
}

#[test]
fn rate_study_writes_plot_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let o = condenser(dir.path(), &["study", "rates", "square-maze", "--params", "3..5", "--order", "1", "--target", "0.05"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(&dir.path().join("rates_square_maze.csv"));
    assert_eq!(csv.lines().count(), 4);
    let fit: serde_json::Value = serde_json::from_str(&read(&dir.path().join("rates_square_maze_fit.json"))).unwrap();
    let slope = fit["fit"]["slope"].as_f64().unwrap();
    assert!(slope < -1.5 && slope > -2.5, "{slope}");
    let svg = read(&dir.path().join("rates_square_maze.svg"));
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<circle").count(), 4);
    assert!(svg.contains("<polyline") && svg.contains("slope"));

    let o = condenser(dir.path(), &["study", "rates", "square-maze", "--params", "3,4"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn single_cut_refuses_the_fit_but_keeps_the_data() {
    let dir = tempfile::tempdir().unwrap();
    let o = condenser(dir.path(), &["study", "defeature", "--n", "4", "--rho", "0.5", "--cuts", "0.05", "--order", "1"]);
    assert!([0, 2].contains(&code(&o)), "{}", stderr(&o));
    let csv = read(&dir.path().join("defeature.csv"));
    assert_eq!(csv.lines().next(), Some("s,capacity,reduction,est_rel_error"));
    assert_eq!(csv.lines().count(), 3);
    let fit: serde_json::Value = serde_json::from_str(&read(&dir.path().join("defeature_fit.json"))).unwrap();
    assert!(fit["fit"]["refused"].as_str().unwrap().contains("at least 3 points"));
    assert!(!read(&dir.path().join("defeature.svg")).contains("<polyline"));
}

#[test]
fn triangle_map_samples_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let o = condenser(dir.path(), &["map-triangle", "--theta", "0.2", "--samples", "11"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(&dir.path().join("map_triangle.csv"));
    assert_eq!(csv.lines().count(), 1 + 3 * 11);
    // the cusp is the start of s1 and s2
    assert_eq!(csv.lines().filter(|l| l.ends_with(",inf,inf")).count(), 2);
    let diag: serde_json::Value = serde_json::from_str(&read(&dir.path().join("map_triangle.json"))).unwrap();
    assert_eq!(diag["cusp_at_infinity"], true);

    assert_eq!(code(&condenser(dir.path(), &["map-triangle", "--theta", "1.0"])), 3);
    assert_eq!(code(&condenser(dir.path(), &["map-triangle", "--samples", "2"])), 3);
}
