//! Black-box tests of the command-line binary.

use std::fs;
use std::path::Path;
use std::process::Command;

fn sigedge() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sigedge"))
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .collect();
    entries.sort_by_key(|e| e.file_name());
    let mut out = Vec::new();
    for e in entries {
        let path = e.path();
        let name = e.file_name().into_string().unwrap();
        if path.is_dir() {
            for (sub, bytes) in read_dir_bytes(&path) {
                out.push((format!("{name}/{sub}"), bytes));
            }
        } else {
            out.push((name, fs::read(&path).unwrap()));
        }
    }
    out
}

#[test]
fn phantom_radiograph_reconstruct_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let ph = tmp.path().join("ph");
    let rg = tmp.path().join("rg");
    let rec = tmp.path().join("rec");

    let status = sigedge().args(["phantom", "--out"]).arg(&ph).status().unwrap();
    assert!(status.success());
    for name in ["phantom.grd", "phantom.pgm", "truth.pgm", "phantom.toml"] {
        assert!(ph.join(name).exists(), "missing {name}");
    }

    let status = sigedge()
        .args(["radiograph", "--input"])
        .arg(ph.join("phantom.grd"))
        .args(["--out"])
        .arg(&rg)
        .status()
        .unwrap();
    assert!(status.success());

    let status = sigedge()
        .args(["reconstruct", "--input"])
        .arg(rg.join("radiograph.grd"))
        .args(["--out"])
        .arg(&rec)
        .status()
        .unwrap();
    assert!(status.success());

    // The noiseless chain reproduces the phantom.
    let original = sigedge::io::read_grid_file(&ph.join("phantom.grd")).unwrap();
    let recovered = sigedge::io::read_grid_file(&rec.join("reconstruction.grd")).unwrap();
    let mut worst = 0.0f64;
    for (u, v, x) in recovered.enumerate() {
        worst = worst.max((x - original.at(u, v)).abs());
    }
    assert!(worst < 1e-9, "round-trip error {worst:e}");
}

#[test]
fn pinned_default_phantom_config_matches_builtin() {
    let repo_config = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/phantom_default.toml");
    let spec = sigedge::phantom::load_spec(&repo_config).unwrap();
    assert_eq!(spec, sigedge::phantom::PhantomSpec::default());
}

#[test]
fn custom_phantom_config_round_trips_through_cli() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("small.toml");
    fs::write(
        &cfg,
        "rows = 64\ncols = 64\n\n[densities]\nouter = 1.0\ncircle = 0.8\ninner = 0.3\n\n\
         [geometry]\ncenter_row = 20.5\ninner_radius = 10.0\ncircle_row = 44.5\ncircle_radius = 6.0\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let status = sigedge()
        .args(["phantom", "--config"])
        .arg(&cfg)
        .args(["--slope", "0.001", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let written = fs::read_to_string(out.join("phantom.toml")).unwrap();
    assert!(written.contains("slope_rate = 0.001"));
    let img = sigedge::io::read_grid_file(&out.join("phantom.grd")).unwrap();
    assert_eq!((img.rows(), img.cols()), (64, 64));
}

#[test]
fn thresholds_csv_reduces_to_closed_form_for_white_noise() {
    let tmp = tempfile::tempdir().unwrap();
    let csv_path = tmp.path().join("thr.csv");
    let status = sigedge()
        .args([
            "thresholds",
            "--width",
            "64",
            "--sigma",
            "0.5",
            "--epsilon",
            "1e-4",
            "--kernel",
            "single:3",
            "--noise",
            "white",
        ])
        .args(["--out"])
        .arg(&csv_path)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "column,sigma_x2,sigma_y2,sigma_delta2,sigma_x_delta,sigma_x_cond2,threshold"
    );
    let expect = sigedge::white_threshold(1e-4, 0.5, 3).unwrap();
    let mut count = 0;
    for line in lines {
        let threshold: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((threshold - expect).abs() <= 1e-9 * expect);
        count += 1;
    }
    assert_eq!(count, 64 - 2 * 3);
}

#[test]
fn experiment_bundles_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let status = sigedge()
            .args(["experiment", "--preset", "white-base", "--seed", "7", "--out"])
            .arg(dir)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let (fa, fb) = (read_dir_bytes(&a), read_dir_bytes(&b));
    assert!(!fa.is_empty());
    assert_eq!(fa.len(), fb.len());
    for ((na, ba), (nb, bb)) in fa.iter().zip(fb.iter()) {
        assert_eq!(na, nb);
        assert_eq!(ba, bb, "bundle file {na} differs between identical runs");
    }
}

#[test]
fn detect_emits_masks_on_noisy_input() {
    let tmp = tempfile::tempdir().unwrap();
    let ph = tmp.path().join("ph");
    assert!(sigedge().args(["phantom", "--out"]).arg(&ph).status().unwrap().success());
    let out = tmp.path().join("det");
    let status = sigedge()
        .args(["detect", "--input"])
        .arg(ph.join("phantom.grd"))
        .args([
            "--kernel", "single:12", "--epsilon", "1e-5", "--noise", "white", "--sigma", "0.2",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let sig = sigedge::io::read_pgm_file(&out.join("significant.pgm")).unwrap();
    assert_eq!((sig.rows(), sig.cols()), (512, 512));
    assert!(sig.as_slice().iter().any(|&p| p > 0), "no significant pixels at all");
}

#[test]
fn config_errors_exit_with_code_two() {
    // Unknown kernel grammar.
    let status = sigedge()
        .args([
            "thresholds", "--width", "64", "--sigma", "1", "--epsilon", "1e-4", "--kernel",
            "ring:3", "--out", "/tmp/never-written.csv",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Missing input file.
    let status = sigedge()
        .args(["reconstruct", "--input", "/nonexistent/input.grd", "--out", "/tmp/never"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Odd width cannot host a between-columns symmetry axis.
    let status = sigedge()
        .args([
            "thresholds", "--width", "63", "--sigma", "1", "--epsilon", "1e-4", "--kernel",
            "single:3", "--out", "/tmp/never-written.csv",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
