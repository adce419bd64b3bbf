use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn grushin(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_grushin"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("run.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

fn column(dir: &Path, name: &str, col: usize) -> Vec<f64> {
    let text = fs::read_to_string(dir.join("out").join(name)).unwrap();
    text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn oscillator_spectrum_begins_4_8_8_12() {
    let dir = TempDir::new().unwrap();
    let cfg = "spectrum.space = \"ybar\"\nspectrum.k_max = 3\nspectrum.lambda_max = 40\n";
    let out = grushin(&["spectrum"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lambdas = column(dir.path(), "spectrum.csv", 0);
    let ks = column(dir.path(), "spectrum.csv", 2);
    for (i, want) in [4.0, 8.0, 8.0, 12.0, 12.0].iter().enumerate() {
        assert!((lambdas[i] - want).abs() < 1e-4 * want, "{lambdas:?}");
    }
    assert!(ks.iter().all(|k| (1.0..=3.0).contains(k)));
    let m = json(dir.path(), "manifest.json");
    assert_eq!(m["status"], "ok");
    assert_eq!(m["config"]["spectrum.k_max"], 3);
    assert!(m["artifacts"].as_array().unwrap().iter().any(|a| a == "spectrum.gp"));
}

#[test]
fn ideal_spectrum_file_gives_log_law() {
    let dir = TempDir::new().unwrap();
    let out = grushin(
        &["spectrum"],
        Some("spectrum.space = \"model\"\nspectrum.lambda_max = 100000\n"),
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let file = dir.path().join("model.csv");
    fs::rename(dir.path().join("out/spectrum.csv"), &file).unwrap();
    let cfg = format!(
        "weyl.source = \"file\"\nweyl.spectrum_file = {:?}\nweyl.law = \"auto\"\nweyl.expected = 0.5\n",
        file.to_str().unwrap()
    );
    let out = grushin(&["weyl"], Some(&cfg), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let fit = json(dir.path(), "weyl_fit.json");
    assert_eq!(fit["law"]["law"], "log_corrected");
    let a = fit["fit"]["leading_coefficient"].as_f64().unwrap();
    assert!((a - 0.5).abs() < 0.025, "a = {a}");
    assert_eq!(fit["competitor"]["plateau_ok"], false);
}

#[test]
fn covercheck_reports_theta_identity() {
    let dir = TempDir::new().unwrap();
    let out = grushin(&["covercheck"], Some("covercheck.c_ly = 2.0\n"), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(dir.path(), "covercheck.json");
    assert!(report["theta_identity_residual"].as_f64().unwrap() < 1e-10);
    let tail = column(dir.path(), "covering_tail.csv", 1);
    assert!(tail.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn malformed_and_unknown_keys_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = grushin(&["geodesic"], Some("grid.nx = 10\n"), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.nx"));
    let out = grushin(&["spectrum"], Some("spectrum.lambda_max = \"big\"\n"), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spectrum.lambda_max"));
    let out = grushin(&["spectrum"], Some("alpha = [\n"), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_errors_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = grushin(&["spectrum"], Some("alpha = -1.0\n"), dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(dir.path(), "manifest.json")["status"], "FAILED");

    let dir = TempDir::new().unwrap();
    let cfg = "grid.tolerance = 1e-9\ngeodesic.dilation.nr = 41\ngeodesic.dilation.nv = 81\n";
    let out = grushin(&["geodesic"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(5));
    let m = json(dir.path(), "manifest.json");
    assert_eq!(m["status"], "FAILED");
    assert_eq!(m["error"]["exit_code"], 5);

    let dir = TempDir::new().unwrap();
    let out = grushin(&["spectrum"], Some("spectrum.oracle_tolerance = 1e-12\n"), dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(dir.path(), "manifest.json")["status"], "FAILED");
    assert!(dir.path().join("out/spectrum.csv").exists());
}

#[test]
fn geodesic_default_run_passes() {
    let dir = TempDir::new().unwrap();
    let out = grushin(&["geodesic"], None, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["distance_field.csv", "dilation.csv", "axis_profile.csv", "geodesic_report.json", "geodesic.gp"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    let report = json(dir.path(), "geodesic_report.json");
    assert!(report["boundary_constant"]["value"].as_f64().unwrap() > 0.0);
    let script = fs::read_to_string(dir.path().join("out/geodesic.gp")).unwrap();
    assert!(script.contains("'distance_field.csv'"));
}

#[test]
fn refine_halves_spacing_and_reports_ratios() {
    let small = "grid.nr = 17\ngrid.nv = 33\ngeodesic.dilation.nr = 91\ngeodesic.dilation.nv = 181\n\
                 geodesic.dilation.pairs = 4\ngeodesic.dilation.tolerance = 1.0\ngeodesic.snowflake.nr = 33\n\
                 geodesic.snowflake.nv = 65\ngeodesic.snowflake.tolerance = 1.0\n";
    let dir = TempDir::new().unwrap();
    let out = grushin(&["geodesic", "--refine", "2"], Some(small), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(dir.path(), "geodesic_report.json");
    assert_eq!(report["dilation"]["worst_defect_per_level"].as_array().unwrap().len(), 2);
    assert_eq!(report["dilation"]["convergence_ratios"].as_array().unwrap().len(), 1);
    assert_eq!(report["distance_field"]["level"], 1);
    // 17 base nodes refined once: 33 distinct r values in the field
    let r = column(dir.path(), "distance_field.csv", 0);
    let mut distinct = r.clone();
    distinct.dedup();
    assert_eq!(distinct.len(), 33);
    assert_eq!(json(dir.path(), "manifest.json")["refine"], 2);

    let out = grushin(&["geodesic", "--refine", "3"], Some(small), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_configs_give_identical_files() {
    let cfg = "spectrum.space = \"xdouble\"\nspectrum.lambda_max = 200\nspectrum.grid.cells = 400\n";
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(grushin(&["spectrum"], Some(cfg), a.path()).status.code(), Some(0));
    assert_eq!(grushin(&["spectrum", "--workers", "1"], Some(cfg), b.path()).status.code(), Some(0));
    for f in ["spectrum.csv", "counting.csv", "spectrum_report.json", "spectrum.gp"] {
        let x = fs::read(a.path().join("out").join(f)).unwrap();
        let y = fs::read(b.path().join("out").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}
