//! Property tests over the algebra and model invariants.

use num_complex::Complex64;
use proptest::prelude::*;

use pulsekam::linalg::{hermitian_eigenvalues, matexp, spectral_norm, ComplexMatrix};
use pulsekam::model::Pulse;

fn entry() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn matrix2() -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec(entry(), 4)
        .prop_map(|data| ComplexMatrix::from_vec(2, data).unwrap())
}

fn hermitian2() -> impl Strategy<Value = ComplexMatrix> {
    matrix2().prop_map(|m| m.add(&m.adjoint()).scale_re(0.5))
}

proptest! {
    #[test]
    fn matexp_inverse_pairs_cancel(h in hermitian2(), theta in -1.5..1.5f64) {
        // anti-Hermitian argument with norm up to ~10
        let arg = h.scale(Complex64::new(0.0, theta));
        let forward = matexp(&arg).unwrap();
        let backward = matexp(&arg.scale_re(-1.0)).unwrap();
        let residual = forward.mul(&backward).sub(&ComplexMatrix::identity(2)).max_abs();
        prop_assert!(residual < 1e-12, "residual {residual:.3e}");
    }

    #[test]
    fn spectral_norm_is_submultiplicative(a in matrix2(), b in matrix2()) {
        let ab = spectral_norm(&a.mul(&b)).unwrap();
        let bound = spectral_norm(&a).unwrap() * spectral_norm(&b).unwrap();
        prop_assert!(ab <= bound + 1e-12, "{ab} > {bound}");
    }

    #[test]
    fn eigenvalue_sum_equals_trace(h in hermitian2()) {
        let eigs = hermitian_eigenvalues(&h).unwrap();
        let sum: f64 = eigs.iter().sum();
        prop_assert!((sum - h.trace().re).abs() < 1e-12);
    }

    #[test]
    fn pulse_phase_over_support_is_area(area in 0.1..5.0f64) {
        let pulse = Pulse::sin2(area);
        prop_assert!((pulse.phase(0.0, 1.0) - area).abs() < 1e-12);
    }

    #[test]
    fn pulse_envelope_is_nonnegative(area in 0.0..5.0f64, t in -0.5..1.5f64) {
        let pulse = Pulse::sin2(area);
        prop_assert!(pulse.value(t) >= 0.0);
    }

    #[test]
    fn pulse_phase_is_additive(t0 in -0.2..1.2f64, t1 in -0.2..1.2f64, t2 in -0.2..1.2f64) {
        let pulse = Pulse::sin2(1.3);
        let direct = pulse.phase(t0, t2);
        let chained = pulse.phase(t0, t1) + pulse.phase(t1, t2);
        prop_assert!((direct - chained).abs() < 1e-12);
    }

    #[test]
    fn unitary_difference_norm_is_bounded_by_two(theta1 in -3.2..3.2f64, theta2 in -3.2..3.2f64) {
        let u = matexp(&ComplexMatrix::pauli_x().scale(Complex64::new(0.0, -theta1))).unwrap();
        let v = matexp(&ComplexMatrix::pauli_y().scale(Complex64::new(0.0, -theta2))).unwrap();
        let delta = spectral_norm(&u.sub(&v)).unwrap();
        prop_assert!(delta <= 2.0 + 1e-9);
    }
}
