use std::path::Path;
use std::process::{Command, Output};

fn tlr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tlr")).args(args).output().expect("spawn tlr")
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "status {:?}\n{}", out.status, String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        ok(tlr(&["gen", "--d", "128", "--k", "4", "--seed", "7", "--out", s(dir.path())]));
    }
    for name in ["matrix.txt", "truth.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(name)).unwrap(), "{name} differs");
    }
}

#[test]
fn lowrank_recovers_grid_instance() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(tlr(&["gen", "--d", "256", "--k", "2", "--grid", "--seed", "3", "--out", s(p)]));
    let reports = p.join("reports");
    ok(tlr(&["lowrank", s(&p.join("matrix.txt")), "--k", "2", "--seed", "3", "--out", s(&reports)]));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(reports.join("lowrank-3.json")).unwrap()).unwrap();
    let err = report["error_rel"].as_f64().unwrap();
    assert!(err <= 1e-6, "error {err}");

    let csv = ok(tlr(&["eval", s(&reports.join("lowrank-3.json")), "--truth", s(&p.join("truth.json"))]));
    let row = csv.lines().nth(1).unwrap();
    assert!(row.ends_with(",true"), "{row}");
}

#[test]
fn sfft_hits_planted_tones() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(tlr(&["gen", "--kind", "signal", "--d", "1024", "--k", "1", "--seed", "5", "--out", s(p)]));
    let line = ok(tlr(&["sfft", s(&p.join("signal.json")), "--k", "1", "--seed", "5"]));
    let report_path = p.join("sfft-5.json");
    std::fs::write(&report_path, line.trim()).unwrap();
    let csv = ok(tlr(&["eval", s(&report_path), "--truth", s(&p.join("truth.json"))]));
    let fields: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[9], fields[10], "planted vs hits in {fields:?}");
}

#[test]
fn eval_without_reports_prints_header() {
    let csv = ok(tlr(&["eval"]));
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("report,command,seed"));
}

#[test]
fn trials_write_one_report_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(tlr(&["gen", "--d", "64", "--k", "2", "--grid", "--out", s(p)]));
    let out = ok(tlr(&["lowrank", s(&p.join("matrix.txt")), "--trials", "3", "--seed", "10"]));
    let seeds: Vec<u64> = out
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds, [10, 11, 12]);
}

#[test]
fn bad_input_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.txt");
    assert_eq!(tlr(&["lowrank", s(&missing)]).status.code(), Some(2));

    let garbled = dir.path().join("bad.txt");
    std::fs::write(&garbled, "3\n1.0\nxyz\n0.5\n").unwrap();
    let out = tlr(&["lowrank", s(&garbled)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    assert_eq!(tlr(&["gen", "--d", "0", "--out", s(dir.path())]).status.code(), Some(2));
}
