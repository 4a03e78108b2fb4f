use loc1d::quad::{integrate, integrate_vec, principal_value, QuadOptions};
use proptest::prelude::*;

fn opts() -> QuadOptions {
    QuadOptions::default()
}

#[test]
fn polynomials_are_exact() {
    let r = integrate(|x| 3.0 * x * x - 2.0 * x + 1.0, &[-1.0, 2.0], opts());
    assert!((r.value - 9.0).abs() < 1e-13);
    assert!(r.converged);
    assert_eq!(r.intervals, 1);
}

#[test]
fn smooth_and_endpoint_singular_integrands() {
    let r = integrate(f64::exp, &[0.0, 1.0], opts());
    assert!((r.value - (1f64.exp() - 1.0)).abs() < 1e-14);
    let r = integrate(f64::sqrt, &[0.0, 1.0], opts());
    assert!((r.value - 2.0 / 3.0).abs() < 1e-11);
    assert!(r.converged);
    let r = integrate(
        |x| 1.0 / x.sqrt(),
        &[0.0, 1.0],
        QuadOptions {
            max_intervals: 5000,
            ..opts()
        },
    );
    assert!((r.value - 2.0).abs() < 1e-8);
}

#[test]
fn breakpoints_handle_kinks() {
    let r = integrate(|x: f64| (x - 0.3).abs(), &[0.0, 0.3, 1.0], opts());
    assert!((r.value - (0.045 + 0.245)).abs() < 1e-15);
    assert_eq!(r.intervals, 2);
}

#[test]
fn vector_components_converge_on_their_own_scale() {
    let r = integrate_vec(
        |x, out: &mut [f64]| {
            out[0] = (-x).exp();
            out[1] = 1e-20 * x.cos();
        },
        2,
        &[0.0, 10.0],
        QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_intervals: 2000,
        },
    );
    assert!(r.converged);
    assert!((r.values[0] - (1.0 - (-10f64).exp())).abs() < 1e-13);
    assert!((r.values[1] - 1e-20 * 10f64.sin()).abs() < 1e-31);
}

#[test]
fn principal_values() {
    let r = principal_value(|_| 1.0, -1.0, 2.0, 0.0, opts());
    assert!((r.value - 2f64.ln()).abs() < 1e-12);
    let r = principal_value(|t| t * t, 0.0, 3.0, 1.0, opts());
    assert!((r.value - (7.5 + 2f64.ln())).abs() < 1e-12);
}

#[test]
fn reports_non_convergence() {
    let r = integrate(
        |x| (1.0 / x).sin(),
        &[1e-6, 1.0],
        QuadOptions {
            max_intervals: 10,
            ..opts()
        },
    );
    assert!(!r.converged);
    assert!(r.intervals <= 10);
}

proptest! {
    #[test]
    fn splitting_the_range_is_additive(a in -3.0f64..0.0, m in 0.0f64..1.0, b in 1.0f64..3.0, k in 0.5f64..4.0) {
        let f = |x: f64| (k * x).sin() * (-0.3 * x * x).exp();
        let whole = integrate(f, &[a, b], opts()).value;
        let mid = a + m * (b - a);
        let parts = integrate(f, &[a, mid], opts()).value + integrate(f, &[mid, b], opts()).value;
        prop_assert!((whole - parts).abs() < 1e-12);
    }
}
