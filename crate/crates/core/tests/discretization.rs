use gfront::harness::checks::{hamiltonian_scan, weno_error, weno_order_study};
use gfront::hj::{numerical_hamiltonian, WenoOrder};
use proptest::prelude::*;

const GRIDS: [usize; 3] = [64, 128, 256];

#[test]
fn weno5_fifth_order_on_smooth_profile() {
    let study = weno_order_study(WenoOrder::Five, &GRIDS).unwrap();
    assert!(study.l1_order >= 4.5, "{study:?}");
    assert!(study.max_order >= 4.5, "{study:?}");
}

#[test]
fn weno3_third_order_on_smooth_profile() {
    let study = weno_order_study(WenoOrder::Three, &GRIDS).unwrap();
    assert!(study.l1_order >= 2.5, "{study:?}");
    // the maximum norm is still in its pre-asymptotic range here
    assert!(study.max_order >= 1.9, "{study:?}");
}

#[test]
fn weno5_beats_weno3() {
    assert!(weno_error(64, WenoOrder::Five).unwrap()[1] < weno_error(64, WenoOrder::Three).unwrap()[1]);
}

#[test]
fn order_study_needs_two_grids() {
    assert!(weno_order_study(WenoOrder::Five, &[64]).is_err());
}

#[test]
fn hamiltonians_consistent_and_monotone() {
    let scan = hamiltonian_scan(11, 1000, 1e-6);
    assert!(scan.passes(1e-14), "{scan:?}");
}

proptest! {
    #[test]
    fn equal_one_sided_values_give_exact_hamiltonian(
        v1 in -40.0f64..40.0, v2 in -40.0f64..40.0, c in -5.0f64..5.0,
        px in -10.0f64..10.0, py in -10.0f64..10.0,
    ) {
        let exact = v1 * px + v2 * py + c * px.hypot(py);
        let h = numerical_hamiltonian([v1, v2], c, [px, px, py, py]);
        prop_assert!((h - exact).abs() <= 1e-14 * (1.0 + exact.abs()));
    }

    #[test]
    fn upwind_side_only_when_flow_dominates(
        v in 2.0f64..40.0, c in -1.9f64..1.9, a in -3.0f64..3.0, b in -3.0f64..3.0, q in -3.0f64..3.0,
    ) {
        // with v > |c| only px⁻ enters
        let h1 = numerical_hamiltonian([v, 0.0], c, [a, b, q, q]);
        let h2 = numerical_hamiltonian([v, 0.0], c, [a, b + 1.0, q, q]);
        prop_assert_eq!(h1, h2);
    }
}
