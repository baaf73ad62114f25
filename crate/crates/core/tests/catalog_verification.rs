use symred::expr::ZeroTestPolicy;
use symred::verify::{random_instances, verify_catalog, verify_random};

#[test]
fn full_catalog_counts() {
    let report = verify_catalog(&ZeroTestPolicy::default());
    let s = report.summary();
    assert!(s.unexpected.is_empty(), "{s:?}");
    assert!(s.route_disagreements.is_empty());
    assert_eq!((s.operators_passed, s.operators_total), (18, 18));
    assert_eq!((s.ode_solutions_passed, s.ode_solutions_total), (4, 4));
    assert_eq!((s.branches_passed, s.branches_total), (4, 4));
    assert_eq!((s.closures_passed, s.closures_total), (2, 2));
    assert_eq!((s.controls_failed, s.controls_total), (5, 5));
    assert!(!s.tolerance_sensitive);
}

#[test]
fn reports_are_deterministic() {
    let a = verify_catalog(&ZeroTestPolicy::default()).to_json();
    let b = verify_catalog(&ZeroTestPolicy::default()).to_json();
    assert_eq!(a, b);
}

#[test]
fn controls_fail_well_above_tolerance() {
    let policy = ZeroTestPolicy::default();
    let report = verify_catalog(&policy);
    for r in report.reports.iter().filter(|r| r.id.starts_with("control.")) {
        assert!(!r.passed);
        assert!(r.max_witness_value() >= 1e3 * policy.tol, "{}", r.id);
    }
}

#[test]
fn random_instances_agree_across_routes() {
    let policy = ZeroTestPolicy::default();
    let instances = random_instances(0, 20, &policy).unwrap();
    let reports = verify_random(&instances);
    let passed = reports.iter().filter(|r| r.passed).count();
    for r in &reports {
        assert!(r.error.is_none(), "{}: {:?}", r.id, r.error);
        assert!(r.routes_agree, "{}", r.id);
    }
    assert!(passed >= 5, "{passed}");
    assert!(passed < 20);
}
