//! The default configuration is the acceptance gate: one named entry per
//! verification area, every one of them green.

use hopflab_cli::config::SuiteConfig;
use hopflab_cli::report::Value;
use hopflab_cli::suite::run_suite;

#[test]
fn the_default_suite_passes_every_criterion() {
    let outcome = run_suite(&SuiteConfig::default()).expect("default suite should run");
    assert!(outcome.all_passed, "default suite must be green");
    assert_eq!(
        outcome.report.get("passed").and_then(Value::as_bool),
        Some(true)
    );

    let criteria = outcome
        .report
        .get("criteria")
        .and_then(Value::as_arr)
        .expect("criteria array");
    let names: Vec<&str> = criteria
        .iter()
        .map(|c| c.get("name").and_then(Value::as_str).expect("criterion name"))
        .collect();
    assert_eq!(
        names,
        [
            "oracle_agreement",
            "hopf_constancy",
            "spectral_tables",
            "degenerate_structure",
            "transfer_law",
            "structure_identities",
            "tube_law",
            "classification",
            "reeb_commutator",
            "isometry_invariance",
            "determinism",
        ]
    );
    for criterion in criteria {
        assert_eq!(
            criterion.get("passed").and_then(Value::as_bool),
            Some(true),
            "criterion {:?} must pass",
            criterion.get("name")
        );
        let has_details = matches!(
            criterion.get("details"),
            Some(Value::Obj(entries)) if !entries.is_empty()
        );
        assert!(has_details, "criterion {:?} must carry detail rows", criterion.get("name"));
    }

    let families = outcome
        .report
        .get("families")
        .and_then(Value::as_arr)
        .expect("family blocks");
    assert_eq!(families.len(), 7, "the whole catalog is selected by default");
    let ids: Vec<&str> = families
        .iter()
        .map(|f| f.get("family").and_then(Value::as_str).expect("family id"))
        .collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted, "family blocks are ordered by canonical id");
}
