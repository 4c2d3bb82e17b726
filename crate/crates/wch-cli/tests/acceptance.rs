//! Acceptance suite: one test per verification criterion, at the default
//! configuration. Each test prints a single pass/fail line with the
//! measured numbers and asserts the criterion's flag.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! measured lines for passing criteria too.

use wch_cli::verify::{self, Outcome};

fn check(outcome: Outcome) {
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_01_curvature_period() {
    check(verify::criterion_01_period());
}

#[test]
fn criterion_02_curve_first_integrals() {
    check(verify::criterion_02_curve_laws());
}

#[test]
fn criterion_03_kernel_fields_and_boundary_table() {
    check(verify::criterion_03_kernel_fields());
}

#[test]
fn criterion_04_coefficient_recursion_endpoints() {
    check(verify::criterion_04_coefficients());
}

#[test]
fn criterion_05_closed_form_tilt_solves_its_equation() {
    check(verify::criterion_05_tilt(verify::shared_context()));
}

#[test]
fn criterion_06_layer_moments_and_identity_table() {
    check(verify::criterion_06_constants(verify::shared_context()));
}

#[test]
fn criterion_07_profile_operator_oracles() {
    check(verify::criterion_07_profiles(verify::shared_context()));
}

#[test]
fn criterion_08_fifth_order_projection_identity() {
    check(verify::criterion_08_projection(verify::shared_context()));
}

#[test]
fn criterion_09_residual_decay_rate_and_ablations() {
    check(verify::criterion_09_residual_scaling(
        verify::shared_context(),
        wch_core::approx::Variant::Full,
    ));
}

#[test]
fn criterion_10_projection_drop_an_order() {
    check(verify::criterion_10_projection_drop(verify::shared_context()));
}

#[test]
fn criterion_11_vertical_monotonicity() {
    check(verify::criterion_11_monotonicity(verify::shared_context()));
}

#[test]
fn criterion_12_zero_set_displacement() {
    check(verify::criterion_12_zero_set(verify::shared_context()));
}
