//! Dyson and Magnus expansions as comparison propagators.
//!
//! Both are built in the interaction representation with respect to the
//! pulse propagator: with `H~(s) = U0(t0,s) · ε V · U0(s,t0)`,
//!
//! * `DYSON1  = U0 (I − i ∫ H~)`
//! * `DYSON2  = U0 (I − i ∫ H~ − ∫∫_{s2<s1} H~(s1) H~(s2))`
//! * `MAGNUS1 = U0 exp(−i ∫ H~)`
//! * `MAGNUS2 = U0 exp(−i ∫ H~ − ½ ∫∫_{s2<s1} [H~(s1), H~(s2)])`
//!
//! Magnus truncations stay unitary; Dyson truncations do not.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::linalg::{matexp, ComplexMatrix};
use crate::model::SuddenProblem;
use crate::propagator::{closed_form_u0, Propagator, PropagatorKind};
use crate::quad::{composite_matrix, integrate_matrix, nodes_ascending, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    Dyson1,
    Dyson2,
    Magnus1,
    Magnus2,
}

impl BaselineKind {
    pub fn label(&self) -> &'static str {
        match self {
            BaselineKind::Dyson1 => "dyson1",
            BaselineKind::Dyson2 => "dyson2",
            BaselineKind::Magnus1 => "magnus1",
            BaselineKind::Magnus2 => "magnus2",
        }
    }

    pub fn order(&self) -> usize {
        match self {
            BaselineKind::Dyson1 | BaselineKind::Magnus1 => 1,
            BaselineKind::Dyson2 | BaselineKind::Magnus2 => 2,
        }
    }
}

/// Iterated Gauss–Legendre integral over the triangle `a <= s2 <= s1 <= t`:
/// `∫_a^t ds1 combine(H~(s1), ∫_a^{s1} H~(s2) ds2)`, with the running inner
/// integral accumulated along the ascending outer nodes and the whole
/// estimate refined by panel doubling.
fn triangle_double_integral<H, C>(
    h_tilde: &H,
    a: f64,
    b: f64,
    combine: &C,
    config: &QuadratureConfig,
) -> Result<ComplexMatrix>
where
    H: Fn(f64) -> Result<ComplexMatrix> + ?Sized,
    C: Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix,
{
    if a == b {
        let probe = h_tilde(a)?;
        return Ok(ComplexMatrix::zeros(probe.dim()));
    }
    if b < a {
        let reversed = triangle_double_integral(h_tilde, b, a, combine, config)?;
        return Ok(reversed.scale_re(-1.0));
    }

    let estimate_with = |panels: usize| -> Result<ComplexMatrix> {
        let nodes = nodes_ascending(config.order)?;
        let h = (b - a) / panels as f64;
        let mut sum: Option<ComplexMatrix> = None;
        let mut inner = None::<ComplexMatrix>;
        let mut prev = a;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            for (offset, w) in &nodes {
                let s1 = mid + 0.5 * h * offset;
                let segment = composite_matrix(h_tilde, prev, s1, 1, config.order)?;
                let f_s1 = match inner.take() {
                    Some(acc) => acc.add(&segment),
                    None => segment,
                };
                prev = s1;
                let h_s1 = h_tilde(s1)?;
                let term = combine(&h_s1, &f_s1).scale_re(w * 0.5 * h);
                sum = Some(match sum.take() {
                    Some(acc) => acc.add(&term),
                    None => term,
                });
                inner = Some(f_s1);
            }
        }
        sum.ok_or_else(|| CoreError::InvalidInput("empty quadrature".into()))
    };

    let mut panels = config.panels.max(4);
    let mut estimate = estimate_with(panels)?;
    let mut achieved = f64::INFINITY;
    for _ in 0..config.max_doublings {
        panels *= 2;
        let refined = estimate_with(panels)?;
        achieved = refined.sub(&estimate).max_abs();
        estimate = refined;
        if achieved < config.tol {
            return Ok(estimate);
        }
    }
    if achieved < config.tol {
        Ok(estimate)
    } else {
        Err(CoreError::QuadratureNoConvergence { achieved })
    }
}

/// Build the requested expansion as a two-time propagator handle.
pub fn baseline_propagator(problem: &SuddenProblem, kind: BaselineKind) -> Propagator {
    let u0 = closed_form_u0(problem);
    let dim = problem.dim();
    let epsilon = problem.epsilon();
    let static_op = problem.static_operator().clone();
    let quad = QuadratureConfig::default();

    Propagator::from_fn(
        PropagatorKind::Composed,
        1e-10,
        dim,
        kind.label(),
        move |t, t0| {
            let h_tilde = |s: f64| -> Result<ComplexMatrix> {
                let backward = u0.evaluate(t0, s)?;
                let forward = u0.evaluate(s, t0)?;
                Ok(backward.mul(&static_op).mul(&forward).scale_re(epsilon))
            };
            let first = integrate_matrix(&h_tilde, t0, t, &quad)?;
            let factor = match kind {
                BaselineKind::Dyson1 => {
                    ComplexMatrix::identity(dim).add(&first.scale(Complex64::new(0.0, -1.0)))
                }
                BaselineKind::Dyson2 => {
                    let ordered = triangle_double_integral(
                        &h_tilde,
                        t0,
                        t,
                        &|h1: &ComplexMatrix, f1: &ComplexMatrix| h1.mul(f1),
                        &quad,
                    )?;
                    ComplexMatrix::identity(dim)
                        .add(&first.scale(Complex64::new(0.0, -1.0)))
                        .sub(&ordered)
                }
                BaselineKind::Magnus1 => matexp(&first.scale(Complex64::new(0.0, -1.0)))?,
                BaselineKind::Magnus2 => {
                    let bracket = triangle_double_integral(
                        &h_tilde,
                        t0,
                        t,
                        &|h1: &ComplexMatrix, f1: &ComplexMatrix| {
                            h1.mul(f1).sub(&f1.mul(h1))
                        },
                        &quad,
                    )?;
                    let exponent = first
                        .scale(Complex64::new(0.0, -1.0))
                        .sub(&bracket.scale_re(0.5));
                    matexp(&exponent)?
                }
            };
            Ok(u0.evaluate(t, t0)?.mul(&factor))
        },
    )
}
