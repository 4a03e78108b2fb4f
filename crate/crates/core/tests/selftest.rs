use loc1d::selftest::{run, Fault};

#[test]
fn clean_build_passes_and_fault_is_caught() {
    let report = run(None);
    print!("{}", report.table());
    assert!(report.passed());
    assert!(report.seconds < 60.0, "selftest took {} s", report.seconds);

    let faulty = run(Some(Fault::AiryConstant));
    assert!(!faulty.passed());
    assert_eq!(faulty.failed_blocks(), vec!["corefn"]);
    let json = serde_json::to_value(&faulty).unwrap();
    assert_eq!(
        json["checks"].as_array().unwrap().len(),
        report.checks.len()
    );
}
