//! Acceptance suite: one test per criterion, each printing its pass/fail
//! line (visible with `--nocapture`) and asserting exact success within
//! the stated time budget.

use tautres_core::selftest::{run_selftest, CriterionResult};

fn check(id: u32, budget_seconds: f64) {
    let results = run_selftest(Some(id));
    assert_eq!(results.len(), 1, "criterion {id} did not run");
    let CriterionResult {
        name,
        passed,
        detail,
        seconds,
        ..
    } = &results[0];
    println!(
        "criterion {id:>2} [{}] {seconds:.2}s: {name} — {detail}",
        if *passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {id} ({name}) failed: {detail}");
    assert!(
        *seconds < budget_seconds,
        "criterion {id} ({name}) exceeded its {budget_seconds}s budget: {seconds:.2}s"
    );
}

#[test]
fn criterion_01_k1_reduction() {
    check(1, 1.0);
}

#[test]
fn criterion_02_closed_form_k2() {
    check(2, 10.0);
}

#[test]
fn criterion_03_closed_form_k3() {
    check(3, 60.0);
}

#[test]
fn criterion_04_surface_oracle() {
    check(4, 600.0);
}

#[test]
fn criterion_05_flag_sum_identity() {
    check(5, 30.0);
}

#[test]
fn criterion_06_degree_bookkeeping() {
    check(6, 600.0);
}

#[test]
fn criterion_07_pruning_neutrality() {
    check(7, 600.0);
}

#[test]
fn criterion_08_exponential_identity() {
    check(8, 300.0);
}

#[test]
fn criterion_09_q_table() {
    check(9, 1.0);
}

#[test]
fn criterion_10_residue_convention() {
    check(10, 1.0);
}
