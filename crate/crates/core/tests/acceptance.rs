//! End-to-end acceptance gate: every check in the self-check suite must pass.
//! One line is printed per criterion so failures are attributable at a glance.

use darboux_roll::verify::run_all;

#[test]
fn acceptance_criteria() {
    let results = run_all(None);
    assert!(!results.is_empty());
    let mut all_passed = true;
    for r in &results {
        println!(
            "{} {:<24} {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all_passed &= r.passed;
    }
    assert!(all_passed, "one or more acceptance checks failed (see lines above)");
}
