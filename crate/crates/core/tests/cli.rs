use std::fs;
use std::path::{Path, PathBuf};

use singular_spectra::cli::{main_with_args, read_spectrum_csv};
use singular_spectra::experiments::Report;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("spectra-lab").chain(args.iter().copied()))
}

fn run_in(verb: &str, cfg: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![verb, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn measure_writes_atoms_and_ahlfors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in("measure", &config("cantor_string.toml"), dir.path(), &["--level", "5"]), 0);
    let csv = fs::read_to_string(dir.path().join("measure.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 32);
    let ahl: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("ahlfors.json")).unwrap()).unwrap();
    assert!(ahl["a_hat"].as_f64().unwrap() >= ahl["b_hat"].as_f64().unwrap());
}

#[test]
fn predict_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("cantor_string.toml");
    assert_eq!(run_in("predict", &cfg, dir.path(), &["--level", "9"]), 0);
    let p: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("prediction.json")).unwrap()).unwrap();
    assert!((p["prediction"]["theta"].as_f64().unwrap() - 0.38685).abs() < 1e-5);

    assert_eq!(run_in("spectrum", &cfg, dir.path(), &["--level", "9"]), 0);
    let spectrum = dir.path().join("spectrum.csv");
    let sr = read_spectrum_csv(&fs::read_to_string(&spectrum).unwrap()).unwrap();
    assert_eq!(sr.values.len(), 512);
    assert_eq!(
        run_in("fit", &cfg, dir.path(), &["--level", "9", "--spectrum", spectrum.to_str().unwrap(), "--window", "4:20"]),
        0
    );
    let fit: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("fit.json")).unwrap()).unwrap();
    assert_eq!(fit["window"], serde_json::json!([4, 20]));
    assert!((fit["theta_hat"].as_f64().unwrap() / 0.38685 - 1.0).abs() < 0.15);
}

#[test]
fn reports_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = config("covering_audit.toml");
    assert_eq!(run_in("covering", &cfg, a.path(), &[]), 0);
    assert_eq!(run_in("report", &cfg, b.path(), &[]), 0);
    let ja = fs::read_to_string(a.path().join("summary.json")).unwrap();
    let jb = fs::read_to_string(b.path().join("summary.json")).unwrap();
    assert_eq!(ja, jb);
    for d in 1..=3 {
        assert!(a.path().join(format!("covering_d{d}.csv")).exists());
    }
    let r = Report::from_json(&ja).unwrap();
    assert!(r.passed() && r.flags_consistent());
    assert_eq!(r.config_hash.len(), 64);
}

#[test]
fn failing_flag_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("cantor_string.toml")).unwrap();
    let strict = text.replace("[checks]", "[checks]\ntheta_rel_tol = 0.0");
    let strict = if strict == text { format!("{text}\n[checks]\ntheta_rel_tol = 0.0\n") } else { strict };
    let cfg = dir.path().join("strict.toml");
    fs::write(&cfg, strict).unwrap();
    assert_eq!(run_in("spectrum", &cfg, &dir.path().join("out"), &["--level", "9"]), 1);
    let r = Report::from_json(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert!(r.failed_flags().contains(&"theta"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "experiment = \"spectrum\"\nbogus = 1\n").unwrap();
    assert_eq!(run_in("spectrum", &bad, dir.path(), &[]), 2);
    assert_eq!(run_in("spectrum", &dir.path().join("missing.toml"), dir.path(), &[]), 2);
    assert_eq!(run(&["spectrum"]), 2);
    assert_eq!(run(&["frobnicate"]), 2);
    let text = fs::read_to_string(config("cantor_string.toml")).unwrap();
    fs::write(&bad, text.replace("bessel:1:2", "riesz:3:1")).unwrap();
    assert_eq!(run_in("spectrum", &bad, dir.path(), &[]), 2);
}
