use cxgeom::verify::{all_pass, run_suite, write_csv, write_json, Relation, SuiteOptions};
use cxgeom::GeomError;

#[test]
fn spencer_suite_passes_and_is_sorted() {
    let checks = run_suite("spencer", &SuiteOptions::default()).unwrap();
    assert!(all_pass(&checks));
    assert!(checks.windows(2).all(|w| w[0].name < w[1].name));
    let oracle = checks.iter().find(|c| c.name == "o4.H12_vs_curvature_count").unwrap();
    assert_eq!((oracle.value, oracle.relation), (20.0, Relation::Equals(20.0)));
}

#[test]
fn same_seed_same_report() {
    let opts = SuiteOptions { seed: 11, ..Default::default() };
    let (a, b) = (run_suite("spinor", &opts).unwrap(), run_suite("spinor", &opts).unwrap());
    let bytes = |c| {
        let mut out = Vec::new();
        write_json(c, &mut out).unwrap();
        write_csv(c, &mut out).unwrap();
        out
    };
    assert_eq!(bytes(&a), bytes(&b));
    assert!(all_pass(&a));
}

#[test]
fn tolerance_override_can_fail_a_check() {
    let mut opts = SuiteOptions::default();
    opts.tolerances.insert("lemma.vanishing_side_projection".into(), 1e-300);
    let checks = run_suite("jspace", &opts).unwrap();
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    assert_eq!(failed, ["lemma.vanishing_side_projection"]);
}

#[test]
fn bad_inputs() {
    assert!(matches!(run_suite("everything", &SuiteOptions::default()), Err(GeomError::InvalidInput(_))));
    let opts: Result<SuiteOptions, _> = serde_json::from_str(r#"{"seed": 1, "colour": "red"}"#);
    assert!(opts.is_err());
}
