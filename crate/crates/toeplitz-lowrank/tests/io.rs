use std::fs;

use num_complex::Complex64;
use toeplitz_lowrank::covariance::SampleSet;
use toeplitz_lowrank::io::{read_json, read_matrix, read_samples, write_json, write_matrix, write_samples};
use toeplitz_lowrank::toeplitz::{SparseSignal, SymToeplitz};
use toeplitz_lowrank::Error;

fn scratch_dir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("tlr-io-{name}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn matrix_file_round_trip() {
    let dir = scratch_dir("matrix");
    let path = dir.join("t.txt");
    let t = SymToeplitz::new(vec![2.0, 0.5, -0.25, 1e-300]).unwrap();
    write_matrix(&path, &t).unwrap();
    assert_eq!(read_matrix(&path).unwrap(), t);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn truncated_matrix_reports_line() {
    let dir = scratch_dir("bad");
    let path = dir.join("t.txt");
    fs::write(&path, "3\n1.0\n2.0\n").unwrap();
    assert!(matches!(read_matrix(&path), Err(Error::Parse { line: 3, .. })));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn signal_json_uses_pairs() {
    let dir = scratch_dir("signal");
    let path = dir.join("x.json");
    let x = SparseSignal::new(64, vec![0.25], vec![Complex64::new(1.0, -2.0)]).unwrap();
    write_json(&path, &x).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["coeffs"][0], serde_json::json!([1.0, -2.0]));
    let y: SparseSignal = read_json(&path).unwrap();
    assert_eq!(x, y);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sample_file_layout() {
    let x = SampleSet::from_rows(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let mut buf = Vec::new();
    write_samples(&mut buf, &x).unwrap();
    assert_eq!(&buf[..8], &2u64.to_le_bytes());
    assert_eq!(&buf[16..24], &1.0f64.to_le_bytes());
    assert!(read_samples(&buf[..20]).is_err());
}
