use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_semiglobal"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

const FREE: &str = "potential=poly:0\nE=0.5\nhbar=1\nq_min=-2\nq_max=2\nn=21\n";
const HARMONIC: &str = "potential=harmonic:1\nE=0.5\nhbar=0.1\nq_min=-1.5\nq_max=1.5\nn=31\n";

#[test]
fn free_run_writes_a_plane_wave() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), FREE, &["run"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let samples = rows(&d.path().join("out/samples.csv"));
    assert_eq!(samples.len(), 21);
    let first = samples[0][3].parse::<f64>().unwrap();
    for r in &samples {
        let q: f64 = r[0].parse().unwrap();
        let (re, im): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((re.hypot(im) - first).abs() < 1e-9);
        // phase advances by k q with k = 1
        let ratio = num_complex::Complex64::new(re, im) / num_complex::Complex64::from_polar(first, q);
        assert!((ratio.arg()).abs() < 1e-8 || (ratio.arg().abs() - std::f64::consts::PI).abs() < 1e-8);
    }
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("out/run.json")).unwrap()).unwrap();
    assert!(meta.is_object());
}

#[test]
fn single_point_grid_is_a_config_error() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), &FREE.replace("n=21", "n=1"), &["run"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid must have at least 2 points"));
}

#[test]
fn harmonic_run_crosses_turning_points() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), HARMONIC, &["run"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for r in rows(&d.path().join("out/samples.csv")) {
        assert!(r[3].parse::<f64>().unwrap().is_finite());
    }
}

#[test]
fn pair_output_has_constant_wronskian() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), &format!("{HARMONIC}pair=true\n"), &["run"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.path().join("out/samples_2.csv").exists());
    assert!(d.path().join("out/wronskian.csv").exists());
}

#[test]
fn sector_counts() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), FREE, &["sectors", "--q", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let iv = rows(&d.path().join("out/sector_intervals.csv"));
    assert_eq!(iv.len(), 2);
    let lin = FREE.replace("poly:0", "linear:1").replace("E=0.5", "E=0");
    let out = run(d.path(), &lin, &["sectors", "--q", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&d.path().join("out/sector_intervals.csv")).len(), 3);
}

#[test]
fn contour_with_bad_sector_index_fails() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), FREE, &["contour", "--q", "0", "--sector-in", "7"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(d.path(), FREE, &["contour", "--q", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(rows(&d.path().join("out/contour.csv")).len() > 2);
}

#[test]
fn compare_free_against_wkb() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), FREE, &["compare", "--ref", "wkb"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("out/compare.json")).unwrap()).unwrap();
    assert!(v["rel_l2_error"].as_f64().unwrap() <= 1e-7);
    assert_eq!(v["passed"], serde_json::Value::Bool(true));
}

#[test]
fn compare_against_a_csv_reference() {
    let d = TempDir::new().unwrap();
    let mut text = String::from("q,re1,im1\n");
    for i in 0..21 {
        let q = -2.0 + 0.2 * i as f64;
        text.push_str(&format!("{},{},{}\n", q, q.cos(), q.sin()));
    }
    fs::write(d.path().join("ref.csv"), text).unwrap();
    let r = d.path().join("ref.csv");
    let out = run(d.path(), FREE, &["compare", "--ref", r.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn compare_with_missing_file_fails() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), FREE, &["compare", "--ref", "/nonexistent/ref.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn scaling_with_one_hbar_has_no_ratio() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), HARMONIC, &["scaling", "--hbars", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = rows(&d.path().join("out/scaling.csv"));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][3], "n/a");
}

#[test]
fn free_scaling_sits_at_the_stencil_floor() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), FREE, &["scaling", "--hbars", "1,0.5"]);
    let r = rows(&d.path().join("out/scaling.csv"));
    assert_eq!(r.len(), 2);
    assert!(r.iter().all(|row| row[3] == "n/a"));
    assert_ne!(out.status.code(), None);
}

#[test]
fn set_overrides_the_config() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), FREE, &["--set", "n=5", "run"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&d.path().join("out/samples.csv")).len(), 5);
    let out = run(d.path(), FREE, &["--set", "bogus=1", "run"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn outputs_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        assert_eq!(run(d.path(), HARMONIC, &["run"]).status.code(), Some(0));
    }
    for f in ["samples.csv", "run.json"] {
        let x = fs::read(a.path().join("out").join(f)).unwrap();
        let y = fs::read(b.path().join("out").join(f)).unwrap();
        // run.json records the output directory
        if f == "samples.csv" {
            assert_eq!(x, y);
        } else {
            let s = |v: Vec<u8>, d: &TempDir| String::from_utf8(v).unwrap().replace(d.path().to_str().unwrap(), "");
            assert_eq!(s(x, &a), s(y, &b));
        }
    }
}

#[test]
fn special_functions_print_csv() {
    let out = Command::new(env!("CARGO_BIN_EXE_semiglobal")).args(["airy", "--x", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.3550280538878172"), "{text}");
    let out = Command::new(env!("CARGO_BIN_EXE_semiglobal")).args(["pearcey", "--x", "0", "--y", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
