//! Two-time unitary propagators.
//!
//! Three constructions are provided:
//! * [`closed_form_u0`] — the exact propagator of the pulse term alone,
//!   available in closed form because the pulse Hamiltonian commutes with
//!   itself at different times;
//! * [`ode_reference`] — a high-accuracy adaptive Runge–Kutta integration of
//!   the Schrödinger equation for an arbitrary time-dependent generator, used
//!   as the ground truth in error metrics;
//! * [`effective_propagator`] — the composition `U_ref · exp(−i (t−t0) ε D(t0))`
//!   that propagates a reference Hamiltonian augmented by a compatible part.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::linalg::{matexp, ComplexMatrix, HERMITICITY_TOL};
use crate::model::SuddenProblem;

/// Time-dependent operator, `t -> H(t)`.
pub type HamiltonianFn = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;

/// Time-dependent operator that may fail to evaluate (e.g. a truncated
/// commutator series).
pub type OperatorFn = Arc<dyn Fn(f64) -> Result<ComplexMatrix> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorKind {
    ClosedForm,
    OdeReference,
    Composed,
}

/// Evaluatable two-time unitary `U(t, t0)`.
///
/// Handles are immutable after construction and cheap to clone; evaluation
/// closures are shared. The `quality` field is the tolerance the handle
/// promises: `U(t, t) = I` holds to `quality`, and unitarity and the group
/// property hold to ten times `quality`.
#[derive(Clone)]
pub struct Propagator {
    kind: PropagatorKind,
    quality: f64,
    dim: usize,
    label: String,
    eval: Arc<dyn Fn(f64, f64) -> Result<ComplexMatrix> + Send + Sync>,
}

impl std::fmt::Debug for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Propagator")
            .field("kind", &self.kind)
            .field("quality", &self.quality)
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish()
    }
}

impl Propagator {
    pub fn from_fn<F>(kind: PropagatorKind, quality: f64, dim: usize, label: &str, eval: F) -> Self
    where
        F: Fn(f64, f64) -> Result<ComplexMatrix> + Send + Sync + 'static,
    {
        Self {
            kind,
            quality,
            dim,
            label: label.to_string(),
            eval: Arc::new(eval),
        }
    }

    pub fn evaluate(&self, t: f64, t0: f64) -> Result<ComplexMatrix> {
        if !(t.is_finite() && t0.is_finite()) {
            return Err(CoreError::InvalidInput("propagator times must be finite".into()));
        }
        (self.eval)(t, t0)
    }

    pub fn kind(&self) -> PropagatorKind {
        self.kind
    }

    pub fn quality(&self) -> f64 {
        self.quality
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Entrywise deviation of `U†U` from the identity at `(t, t0)`.
    pub fn unitarity_defect(&self, t: f64, t0: f64) -> Result<f64> {
        Ok(self.evaluate(t, t0)?.unitarity_defect())
    }
}

/// Exact propagator of the pulse term: `U(t, t0) = exp(−i θ(t,t0) · coupling)`
/// with `θ` the accumulated pulse phase.
pub fn closed_form_u0(problem: &SuddenProblem) -> Propagator {
    let pulse = *problem.pulse();
    let coupling = problem.coupling_operator().clone();
    let dim = problem.dim();
    Propagator::from_fn(PropagatorKind::ClosedForm, 1e-13, dim, "u0", move |t, t0| {
        let theta = pulse.phase(t0, t);
        matexp(&coupling.scale(Complex64::new(0.0, -theta)))
    })
}

// Dormand–Prince 5(4) coefficients.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Right-hand side of the Schrödinger equation, `U' = −i H(t) U`.
fn schrodinger_rhs(h_fn: &dyn Fn(f64) -> ComplexMatrix, t: f64, u: &ComplexMatrix) -> ComplexMatrix {
    h_fn(t).mul(u).scale(Complex64::new(0.0, -1.0))
}

/// Integrate `U' = −i H(t) U` from `t0` to `t1` starting from `u0`, with an
/// embedded Dormand–Prince 5(4) pair, per-step error below `tol` and PI step
/// control. Each column of `U` evolves independently; the error norm is the
/// largest entrywise deviation between the two embedded orders.
fn dp54_integrate(
    h_fn: &dyn Fn(f64) -> ComplexMatrix,
    t0: f64,
    t1: f64,
    u0: ComplexMatrix,
    tol: f64,
) -> Result<ComplexMatrix> {
    if t0 == t1 {
        return Ok(u0);
    }
    let dim = u0.dim();
    let direction = (t1 - t0).signum();
    let span = (t1 - t0).abs();

    let mut t = t0;
    let mut y = u0;
    let mut h = direction * span.min(0.1_f64.min(span));
    let mut err_prev: f64 = 1.0;
    let mut k: Vec<ComplexMatrix> = Vec::with_capacity(7);
    let mut k1: Option<ComplexMatrix> = None;

    loop {
        let remaining = t1 - t;
        if remaining * direction <= 0.0 {
            return Ok(y);
        }
        if h.abs() > remaining.abs() {
            h = remaining;
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(CoreError::IntegrationFailure { t });
        }

        k.clear();
        k.push(match k1.take() {
            Some(stage) => stage,
            None => schrodinger_rhs(h_fn, t, &y),
        });
        for stage in 1..7 {
            let mut arg = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = DP_A[stage][j];
                if a != 0.0 {
                    arg.add_scaled_assign(kj, Complex64::new(a * h, 0.0));
                }
            }
            k.push(schrodinger_rhs(h_fn, t + DP_C[stage] * h, &arg));
        }

        let mut y5 = y.clone();
        let mut err_mat = ComplexMatrix::zeros(dim);
        for (j, kj) in k.iter().enumerate() {
            if DP_B5[j] != 0.0 {
                y5.add_scaled_assign(kj, Complex64::new(DP_B5[j] * h, 0.0));
            }
            let diff = DP_B5[j] - DP_B4[j];
            if diff != 0.0 {
                err_mat.add_scaled_assign(kj, Complex64::new(diff * h, 0.0));
            }
        }
        let err = err_mat.max_abs();

        if err <= tol {
            t += h;
            y = y5;
            // FSAL: the seventh stage is the derivative at the accepted point.
            k1 = Some(k[6].clone());
            let e = (err / tol).max(1e-16);
            let factor = (0.9 * e.powf(-0.14) * err_prev.powf(0.08)).clamp(0.2, 5.0);
            err_prev = e;
            h *= factor;
        } else {
            k1 = None;
            let e = err / tol;
            let factor = (0.9 * e.powf(-0.2)).clamp(0.1, 1.0);
            h *= factor;
        }
    }
}

/// Memoized integration states: for each base time `t0` (the family key) a
/// sorted map from reached times to `U(t, t0)`. Keys are times rounded to
/// 1e-14 so quadrature loops never re-integrate the same point.
struct OdeCache {
    families: Mutex<HashMap<i64, BTreeMap<i64, ComplexMatrix>>>,
}

const TIME_KEY_SCALE: f64 = 1e14;

fn time_key(t: f64) -> i64 {
    (t * TIME_KEY_SCALE).round() as i64
}

impl OdeCache {
    fn new() -> Self {
        Self {
            families: Mutex::new(HashMap::new()),
        }
    }

    /// Nearest cached state to `t` within the family of base `t0`,
    /// creating the family (seeded with the identity at `t0`) if absent.
    fn nearest_state(&self, t0: f64, t: f64, dim: usize) -> (f64, ComplexMatrix) {
        let mut families = self.families.lock().expect("propagator cache poisoned");
        let family = families
            .entry(time_key(t0))
            .or_insert_with(|| BTreeMap::from([(time_key(t0), ComplexMatrix::identity(dim))]));
        let kt = time_key(t);
        if let Some(exact) = family.get(&kt) {
            return (t, exact.clone());
        }
        let below = family.range(..=kt).next_back();
        let above = family.range(kt..).next();
        let (key, state) = match (below, above) {
            (Some((kb, vb)), Some((ka, va))) => {
                if kt - kb <= ka - kt {
                    (*kb, vb.clone())
                } else {
                    (*ka, va.clone())
                }
            }
            (Some((kb, vb)), None) => (*kb, vb.clone()),
            (None, Some((ka, va))) => (*ka, va.clone()),
            (None, None) => unreachable!("family is seeded at creation"),
        };
        (key as f64 / TIME_KEY_SCALE, state)
    }

    fn insert(&self, t0: f64, t: f64, value: ComplexMatrix) {
        let mut families = self.families.lock().expect("propagator cache poisoned");
        if let Some(family) = families.get_mut(&time_key(t0)) {
            family.insert(time_key(t), value);
        }
    }
}

/// High-accuracy reference propagator for an arbitrary generator.
///
/// No unitarity renormalization is applied; whatever defect the integration
/// accumulates is observable through [`Propagator::unitarity_defect`].
/// Evaluations are memoized per base time and restarted from the nearest
/// cached state rather than from `t0`.
pub fn ode_reference(hamiltonian: HamiltonianFn, dim: usize, tol: f64) -> Result<Propagator> {
    if !(1e-14..=1e-6).contains(&tol) {
        return Err(CoreError::InvalidInput(format!(
            "reference tolerance must lie in [1e-14, 1e-6], got {tol:e}"
        )));
    }
    let cache = Arc::new(OdeCache::new());
    Ok(Propagator::from_fn(
        PropagatorKind::OdeReference,
        tol,
        dim,
        "ode",
        move |t, t0| {
            if time_key(t) == time_key(t0) {
                return Ok(ComplexMatrix::identity(dim));
            }
            let (start, state) = cache.nearest_state(t0, t, dim);
            if start == t {
                return Ok(state);
            }
            let value = dp54_integrate(hamiltonian.as_ref(), start, t, state, tol)?;
            cache.insert(t0, t, value.clone());
            Ok(value)
        },
    ))
}

/// Reference propagator for the full problem generator
/// `H(t) = Ω(t)·coupling + ε·static`.
pub fn reference_for_problem(problem: &SuddenProblem, tol: f64) -> Result<Propagator> {
    let owned = problem.clone();
    let dim = problem.dim();
    ode_reference(Arc::new(move |t| owned.hamiltonian(t)), dim, tol)
}

/// Propagator of `H_ref(t) + ε D(t)` given the reference propagator and the
/// compatible part expressed at the base time `t_ref`:
///
/// `U(t, t0) = U_ref(t, t0) · exp(−i (t − t0) ε D(t0))`,
///
/// where `D(t0) = U_ref(t0, t_ref) D(t_ref) U_ref(t_ref, t0)` transports the
/// operator to the evaluation base. The composition is unitary by
/// construction and satisfies the group property exactly (up to the
/// reference's own quality).
pub fn effective_propagator(
    u_ref: &Propagator,
    d_at_ref: &ComplexMatrix,
    eps_k: f64,
    t_ref: f64,
) -> Result<Propagator> {
    if d_at_ref.dim() != u_ref.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: u_ref.dim(),
            actual: d_at_ref.dim(),
        });
    }
    let defect = d_at_ref.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(CoreError::NotHermitian {
            defect,
            tolerance: HERMITICITY_TOL,
        });
    }
    let reference = u_ref.clone();
    let d_ref = d_at_ref.clone();
    let quality = u_ref.quality().max(1e-13);
    let dim = u_ref.dim();
    Ok(Propagator::from_fn(
        PropagatorKind::Composed,
        quality,
        dim,
        "effective",
        move |t, t0| {
            let d_at_base = if t0 == t_ref {
                d_ref.clone()
            } else {
                let forward = reference.evaluate(t0, t_ref)?;
                let backward = reference.evaluate(t_ref, t0)?;
                forward.mul(&d_ref).mul(&backward)
            };
            let generator = d_at_base.scale(Complex64::new(0.0, -(t - t0) * eps_k));
            let s = matexp(&generator)?;
            Ok(reference.evaluate(t, t0)?.mul(&s))
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Pulse, PulseShape};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn closed_form_at_equal_times_is_identity() {
        let u0 = closed_form_u0(&SuddenProblem::two_level(1.0, 0.5));
        let m = u0.evaluate(0.42, 0.42).unwrap();
        assert!(m.sub(&ComplexMatrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn closed_form_over_full_pulse_is_pauli_rotation() {
        // θ(1, 0) = A = 1, so U = exp(−iσ1) = cos(1) I − i sin(1) σ1.
        let u0 = closed_form_u0(&SuddenProblem::two_level(1.0, 0.5));
        let m = u0.evaluate(1.0, 0.0).unwrap();
        let expected = ComplexMatrix::identity(2)
            .scale_re(1.0f64.cos())
            .add(&ComplexMatrix::pauli_x().scale(c(0.0, -(1.0f64.sin()))));
        assert!(m.sub(&expected).max_abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_ode_on_pulse_only_problem() {
        let problem = SuddenProblem::two_level(1.0, 0.0);
        let u0 = closed_form_u0(&problem);
        let reference = reference_for_problem(&problem, 1e-12).unwrap();
        for (t, t0) in [(0.37, 0.0), (1.0, 0.0), (0.8, 0.2), (0.1, 0.9)] {
            let diff = u0
                .evaluate(t, t0)
                .unwrap()
                .sub(&reference.evaluate(t, t0).unwrap())
                .max_abs();
            assert!(diff < 1e-10, "({t}, {t0}) differ by {diff:.3e}");
        }
    }

    #[test]
    fn ode_with_zero_hamiltonian_is_exact_identity() {
        let zero: HamiltonianFn = Arc::new(|_| ComplexMatrix::zeros(2));
        let u = ode_reference(zero, 2, 1e-12).unwrap();
        let m = u.evaluate(3.7, -1.2).unwrap();
        assert_eq!(m.sub(&ComplexMatrix::identity(2)).max_abs(), 0.0);
    }

    #[test]
    fn ode_with_constant_diagonal_hamiltonian() {
        // H = σ3: U(t, 0) = diag(e^{−it}, e^{it}).
        let h: HamiltonianFn = Arc::new(|_| ComplexMatrix::pauli_z());
        let u = ode_reference(h, 2, 1e-12).unwrap();
        for t in [0.3, 1.0, 2.4] {
            let m = u.evaluate(t, 0.0).unwrap();
            assert!((m.get(0, 0) - c(t.cos(), -t.sin())).norm() < 1e-11);
            assert!((m.get(1, 1) - c(t.cos(), t.sin())).norm() < 1e-11);
            assert!(m.get(0, 1).norm() < 1e-12);
            assert!(m.get(1, 0).norm() < 1e-12);
        }
    }

    #[test]
    fn ode_full_problem_self_consistency() {
        let problem = SuddenProblem::two_level(1.0, 0.5);
        let reference = reference_for_problem(&problem, 1e-12).unwrap();
        assert!(reference.unitarity_defect(1.0, 0.0).unwrap() < 1e-11);
        let chained = reference
            .evaluate(1.0, 0.5)
            .unwrap()
            .mul(&reference.evaluate(0.5, 0.0).unwrap());
        let direct = reference.evaluate(1.0, 0.0).unwrap();
        assert!(chained.sub(&direct).max_abs() < 1e-10);
    }

    #[test]
    fn ode_rejects_out_of_range_tolerance() {
        let h: HamiltonianFn = Arc::new(|_| ComplexMatrix::zeros(2));
        assert!(ode_reference(h.clone(), 2, 1e-3).is_err());
        assert!(ode_reference(h, 2, 1e-15).is_err());
    }

    #[test]
    fn ode_reports_failure_time_on_singular_generator() {
        // Generator diverging at t = 1 forces the step size under the floor.
        let h: HamiltonianFn =
            Arc::new(|t| ComplexMatrix::pauli_x().scale_re(1.0 / (1.0 - t)));
        let u = ode_reference(h, 2, 1e-10).unwrap();
        match u.evaluate(1.0, 0.0) {
            Err(CoreError::IntegrationFailure { t }) => {
                assert!(t > 0.9, "failure reported at t = {t}")
            }
            other => panic!("expected integration failure, got {other:?}"),
        }
    }

    #[test]
    fn inverse_relation_holds_for_reference() {
        let problem = SuddenProblem::two_level(1.0, 0.5);
        let reference = reference_for_problem(&problem, 1e-12).unwrap();
        let mut t = 0.13;
        for k in 0..20 {
            let t0 = (0.07 * k as f64) % 1.0;
            t = (t + 0.37) % 1.0;
            let forward = reference.evaluate(t, t0).unwrap();
            let backward = reference.evaluate(t0, t).unwrap();
            let residual = backward.sub(&forward.adjoint()).max_abs();
            assert!(residual < 1e-10, "({t}, {t0}): {residual:.3e}");
        }
    }

    #[test]
    fn effective_with_zero_strength_matches_reference() {
        let problem = SuddenProblem::two_level(1.0, 0.5);
        let u0 = closed_form_u0(&problem);
        let eff = effective_propagator(&u0, &ComplexMatrix::pauli_z(), 0.0, 0.0).unwrap();
        for (t, t0) in [(1.0, 0.0), (0.6, 0.2), (0.1, 0.8)] {
            let diff = eff
                .evaluate(t, t0)
                .unwrap()
                .sub(&u0.evaluate(t, t0).unwrap())
                .max_abs();
            assert!(diff < 1e-14);
        }
    }

    #[test]
    fn effective_at_equal_times_is_identity() {
        let problem = SuddenProblem::two_level(1.0, 0.5);
        let u0 = closed_form_u0(&problem);
        let eff = effective_propagator(&u0, &ComplexMatrix::pauli_z(), 0.5, 0.0).unwrap();
        let m = eff.evaluate(0.31, 0.31).unwrap();
        assert!(m.sub(&ComplexMatrix::identity(2)).max_abs() < 1e-13);
    }

    #[test]
    fn effective_solves_augmented_schrodinger_equation() {
        // Constant pulse keeps every piece analytic: H(t) = c σ1 + ε D(t)
        // with D(t) the transported σ3.
        let problem = SuddenProblem::new(
            Pulse::new(PulseShape::Constant, 0.9, 0.0, 1.0).unwrap(),
            ComplexMatrix::pauli_x(),
            ComplexMatrix::pauli_z(),
            0.3,
        )
        .unwrap();
        let u0 = closed_form_u0(&problem);
        let eff = effective_propagator(&u0, &ComplexMatrix::pauli_z(), 0.3, 0.0).unwrap();

        let u0_for_h = closed_form_u0(&problem);
        let pulse = *problem.pulse();
        let h: HamiltonianFn = Arc::new(move |t| {
            let d = u0_for_h
                .evaluate(t, 0.0)
                .unwrap()
                .mul(&ComplexMatrix::pauli_z())
                .mul(&u0_for_h.evaluate(0.0, t).unwrap());
            ComplexMatrix::pauli_x()
                .scale_re(pulse.value(t))
                .add(&d.scale_re(0.3))
        });
        let reference = ode_reference(h, 2, 1e-12).unwrap();

        for (t, t0) in [(1.0, 0.0), (0.7, 0.2), (0.4, 0.9)] {
            let diff = eff
                .evaluate(t, t0)
                .unwrap()
                .sub(&reference.evaluate(t, t0).unwrap())
                .max_abs();
            assert!(diff < 1e-9, "({t}, {t0}) differ by {diff:.3e}");
        }
    }

    #[test]
    fn effective_rejects_non_hermitian_compatible_part() {
        let problem = SuddenProblem::two_level(1.0, 0.5);
        let u0 = closed_form_u0(&problem);
        let mut bad = ComplexMatrix::zeros(2);
        bad.set(0, 1, c(1.0, 0.0));
        assert!(matches!(
            effective_propagator(&u0, &bad, 0.5, 0.0),
            Err(CoreError::NotHermitian { .. })
        ));
    }

    #[test]
    fn memoization_returns_bitwise_identical_results() {
        let problem = SuddenProblem::two_level(1.0, 0.5);
        let reference = reference_for_problem(&problem, 1e-12).unwrap();
        let first = reference.evaluate(1.0, 0.0).unwrap();
        let second = reference.evaluate(1.0, 0.0).unwrap();
        assert_eq!(first, second);
    }
}
