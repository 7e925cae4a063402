//! Exit-code contract: 2 for invalid input, 3 for numeric failure, and no
//! panics on malformed files.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_conelab")
}

#[test]
fn malformed_raster_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.clf1");
    std::fs::write(&bad, b"not a raster at all").unwrap();
    let out = Command::new(bin())
        .args(["fbp", "--input"])
        .arg(&bad)
        .args(["--out"])
        .arg(dir.path().join("x.clf1"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
}

#[test]
fn missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(bin())
        .args(["sino", "--input"])
        .arg(dir.path().join("absent.clf1"))
        .args(["--delta-deg", "50", "--out"])
        .arg(dir.path().join("s.clf1"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_parameters_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(bin())
        .args(["phantom", "--kind", "disk", "--a", "1.5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unstable_step_size_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // lr_frac > 1 violates the Gram spectral bound before any step runs
    let out = Command::new(bin())
        .args([
            "ntk", "train", "--units", "8", "--m", "16", "--band", "4", "--data-band", "3",
            "--count", "2", "--steps", "5", "--lr-frac", "1.5", "--out",
        ])
        .arg(dir.path().join("run"))
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn ellipse_dataset_writes_count_files_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    let out = Command::new(bin())
        .args(["phantom", "--kind", "ellipses", "--count", "8", "--seed", "7", "--n", "64", "--out"])
        .arg(&ds)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(ds.join("manifest.json").exists());
    let images = (0..8)
        .filter(|i| ds.join(format!("img_{i:04}.clf1")).exists())
        .count();
    assert_eq!(images, 8);
}
