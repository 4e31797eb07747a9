use std::f64::consts::PI;

use monospde_wasm::demo;

#[test]
fn path_is_deterministic_and_pinned() {
    let a = demo::path(1.0, 32, 0.05, 40, 3).unwrap();
    let b = demo::path(1.0, 32, 0.05, 40, 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.l2.len(), 41);
    assert_eq!(a.final_state.len(), 33);
    assert_eq!((a.final_state[0], a.final_state[32]), (0.0, 0.0));
    assert!((a.l2[0] - 0.5f64.sqrt()).abs() < 1e-2);
}

#[test]
fn path_rejects_oversized_requests() {
    assert!(demo::path(1.0, demo::MAX_CELLS + 1, 0.05, 10, 0).is_err());
    assert!(demo::path(1.0, 16, 0.05, demo::MAX_STEPS + 1, 0).is_err());
    assert!(demo::path(-1.0, 16, 0.05, 10, 0).is_err());
}

#[test]
fn coupling_stays_under_envelope_inside_hypothesis() {
    let c = demo::coupling(1.0, 32, 0.05, 100, 8, 1).unwrap();
    assert_eq!(c.pathwise_violations, 0);
    assert_eq!(c.bound.len(), c.mean_sq_diff.len());
    let a = 2.0 * (PI * PI - 1.0);
    assert!((c.gamma6 - a / (a + 1.0)).abs() < 1e-12);
    for (m, b) in c.mean_sq_diff.iter().zip(&c.bound) {
        assert!(*m <= b * (1.0 + 1e-9));
    }
}

#[test]
fn coupling_outside_hypothesis_has_no_envelope() {
    let c = demo::coupling(0.3, 32, 0.01, 20, 4, 1).unwrap();
    assert!(c.bound.is_empty());
    assert!(c.gamma6.is_nan());
}

#[test]
fn margins_match_closed_form() {
    let m = demo::margins(0.25, 1.0, 4).unwrap();
    let (a, c, s) = (&m.alphas, &m.contraction, &m.stability);
    for i in 0..4 {
        assert!((c[i] - (PI * PI - 1.0 / (a[i] * a[i]))).abs() < 1e-12);
        assert!((s[i] - (PI * PI + 1.0)).abs() < 1e-12);
    }
    assert!(c[0] < 0.0 && c[3] > 0.0);
    assert!(demo::margins(0.0, 1.0, 4).is_err());
}
