//! One line per acceptance criterion, driven through the binary.

use std::path::PathBuf;
use std::process::Command;

use cxgeom::verify::{read_json, Check};

const SEED: &str = "1";

fn run_all(tag: &str) -> (PathBuf, Vec<u8>) {
    let out = std::env::temp_dir().join(format!("cxgeom-acceptance-{}-{tag}.json", std::process::id()));
    let status = Command::new(env!("CARGO_BIN_EXE_cxgeom"))
        .args(["verify", "all", "--seed", SEED, "--out"])
        .arg(&out)
        .status()
        .expect("binary runs");
    let bytes = std::fs::read(&out).expect("report written");
    assert!(matches!(status.code(), Some(0) | Some(1)), "unexpected exit {status:?}");
    (out, bytes)
}

fn verdict(checks: &[&Check]) -> (bool, String) {
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| format!("{}={:e}", c.name, c.value)).collect();
    let ok = !checks.is_empty() && failed.is_empty();
    let detail = if failed.is_empty() { format!("{} checks", checks.len()) } else { failed.join(", ") };
    (ok, detail)
}

#[test]
fn acceptance() {
    let (first_path, first) = run_all("a");
    let (second_path, second) = run_all("b");
    let checks = read_json(std::str::from_utf8(&first).unwrap()).unwrap();

    let in_suite = |suite: &str, prefix: &str| -> Vec<&Check> {
        checks.iter().filter(|c| c.suite == suite && c.name.starts_with(prefix)).collect()
    };
    let criteria: [(&str, Vec<&Check>); 9] = [
        ("spencer exactness", in_suite("spencer", "")),
        ("dbar solver", in_suite("dbar", "")),
        ("projector geometry", in_suite("projgeo", "")),
        ("sigma model", in_suite("sigma", "")),
        ("self-duality and pure type", in_suite("jspace", "")),
        ("spinors", in_suite("spinor", "")),
        ("gibbons-hawking", in_suite("curvlab", "")),
        ("yang-mills", in_suite("gaugelab", "ym.")),
        ("einstein-cartan", in_suite("gaugelab", "ec.")),
    ];
    let mut all = true;
    for (k, (label, cs)) in criteria.iter().enumerate() {
        let (ok, detail) = verdict(cs);
        all &= ok;
        println!("criterion {:>2} {label}: {} ({detail})", k + 1, if ok { "PASS" } else { "FAIL" });
    }
    let same = first == second;
    all &= same;
    println!("criterion 10 determinism: {} ({} bytes, seed {SEED})", if same { "PASS" } else { "FAIL" }, first.len());

    let covered: usize = criteria.iter().map(|(_, cs)| cs.len()).sum();
    assert_eq!(covered, checks.len(), "every check belongs to one criterion");
    let _ = std::fs::remove_file(first_path);
    let _ = std::fs::remove_file(second_path);
    assert!(all, "acceptance criteria failed");
}
