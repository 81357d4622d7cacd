use std::path::PathBuf;
use std::process::{Command, Output};

fn cxgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cxgeom")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("cxgeom-cli-{}-{name}", std::process::id()))
}

#[test]
fn unknown_suite_is_usage_error() {
    let out = cxgeom(&["verify", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(cxgeom(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn spencer_csv_passes() {
    let out = cxgeom(&["verify", "spencer", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "suite,name,value,relation,lower,upper,pass,provenance,anchor");
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().any(|r| r.starts_with("spencer,o4.H12_vs_curvature_count,2.0000000000000000e1,")));
    assert!(rows.iter().all(|r| r.contains(",true,")));
}

#[test]
fn malformed_config_is_exit_3() {
    let cfg = scratch("bad.toml");
    std::fs::write(&cfg, "[run]\nseed = \"x\"\n").unwrap();
    assert_eq!(cxgeom(&["verify", "spencer", "--config", cfg.to_str().unwrap()]).status.code(), Some(3));
    std::fs::write(&cfg, "[run]\ntol_scale = -1.0\n").unwrap();
    assert_eq!(cxgeom(&["verify", "spencer", "--config", cfg.to_str().unwrap()]).status.code(), Some(3));
    let _ = std::fs::remove_file(cfg);
}

#[test]
fn failing_check_still_writes_report() {
    let cfg = scratch("strict.toml");
    let out = scratch("strict.json");
    std::fs::write(&cfg, "[run]\nseed = 4\n\n[tolerances]\n\"fock_gram_defect\" = 1e-300\n").unwrap();
    let run = cxgeom(&["verify", "spinor", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    let strict = rows.iter().find(|r| r["name"] == "fock_gram_defect").unwrap();
    assert_eq!(strict["pass"], false);
    assert!(rows.iter().filter(|r| r["name"] != "fock_gram_defect").all(|r| r["pass"] == true));

    // `report` re-emits byte-identically and keeps the verdict
    let again = cxgeom(&["report", out.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(1));
    assert_eq!(again.stdout, std::fs::read(&out).unwrap());
    let _ = std::fs::remove_file(cfg);
    let _ = std::fs::remove_file(out);
}

#[test]
fn missing_report_is_runtime_error() {
    assert_eq!(cxgeom(&["report", "/nonexistent/report.json"]).status.code(), Some(4));
}

#[test]
fn seeds_change_stochastic_suites() {
    let a = cxgeom(&["verify", "dbar", "--seed", "1"]);
    let b = cxgeom(&["verify", "dbar", "--seed", "2"]);
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn operations_emit_json() {
    let out = cxgeom(&["spinor", "roundtrip", "--ell", "3", "--samples", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["max_j_error"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["min_annihilator_dim"], 3);

    let out = cxgeom(&["jspace", "lemma77", "--ell", "2", "--form", "minus", "--samples", "40"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["minus"]["condition_holds"], true);
    assert!(v["minus"]["max_projection"].as_f64().unwrap() < 1e-9);

    let out = cxgeom(&["dbar", "solve", "--n", "65"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["relative_residual"].as_f64().unwrap() < 1e-2);

    let out = cxgeom(&["sigma", "classify", "--fixture", "cp1-conjugate", "--n", "33"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["classification"]["kind"], "antiholomorphic");

    assert_eq!(cxgeom(&["spinor", "roundtrip", "--format", "csv"]).status.code(), Some(2));
}

#[test]
fn gauge_tau_reads_fixture_json() {
    let metric = scratch("rot.json");
    std::fs::write(&metric, r#"{"fixture": "rotating_frame"}"#).unwrap();
    let out = cxgeom(&["gauge", "tau", "--metric", metric.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let verdict = &v["verdict"];
    assert_eq!((verdict["closed"].clone(), verdict["vacuum"].clone(), verdict["consistent"].clone()), (true.into(), true.into(), true.into()));
    std::fs::write(&metric, r#"{"fixture": "klein_bottle"}"#).unwrap();
    assert_eq!(cxgeom(&["gauge", "tau", "--metric", metric.to_str().unwrap()]).status.code(), Some(3));
    let _ = std::fs::remove_file(metric);

    let out = cxgeom(&["gauge", "bpst", "--rho", "0.5", "--probes", "4"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["max_f_plus_star_f"].as_f64().unwrap() < 1e-10);
    assert!((v["charge"]["charge"].as_f64().unwrap().abs() - 1.0).abs() < 0.02);
}
