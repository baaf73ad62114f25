// Certify the whole catalog, companion checks and negative controls.

use symred::expr::ZeroTestPolicy;
use symred::verify::verify_catalog;

pub fn run_example() -> symred::Result<()> {
    let report = verify_catalog(&ZeroTestPolicy::default());
    for r in &report.reports {
        println!(
            "{:<24} expected {:?}, passed {}, routes agree {}",
            r.id, r.expected, r.passed, r.routes_agree
        );
    }
    let s = report.summary();
    println!(
        "operators {}/{}, controls failed {}/{}",
        s.operators_passed, s.operators_total, s.controls_failed, s.controls_total
    );
    assert!(report.all_as_expected());
    assert!(s.route_disagreements.is_empty());
    Ok(())
}

#[allow(dead_code)]
fn main() -> symred::Result<()> {
    run_example()
}
