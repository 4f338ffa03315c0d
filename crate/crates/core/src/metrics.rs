//! Error metrics between approximate and reference propagators, and
//! order-of-convergence studies over the sudden parameter.

use crate::error::{CoreError, Result};
use crate::linalg::{spectral_norm, ComplexMatrix};
use crate::model::SuddenProblem;
use crate::propagator::{reference_for_problem, Propagator};

/// Operator-norm error of one approximant against a reference at `(t, t0)`.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// Spectral norm of the propagator difference.
    pub delta: f64,
    /// Spectral norm of `approx† approx − I` at the same times.
    pub unitarity_defect: f64,
    pub method_label: String,
    pub t0: f64,
    pub t: f64,
}

/// `Δ = ||approx(t, t0) − reference(t, t0)||` in the spectral norm, plus the
/// approximant's unitarity defect at the same evaluation.
pub fn delta_error(
    approx: &Propagator,
    reference: &Propagator,
    t0: f64,
    t: f64,
) -> Result<ErrorReport> {
    if approx.dim() != reference.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: reference.dim(),
            actual: approx.dim(),
        });
    }
    let a = approx.evaluate(t, t0)?;
    let r = reference.evaluate(t, t0)?;
    let delta = spectral_norm(&a.sub(&r))?;
    let gram = a.adjoint().mul(&a);
    let unitarity_defect = spectral_norm(&gram.sub(&ComplexMatrix::identity(a.dim())))?;
    Ok(ErrorReport {
        delta,
        unitarity_defect,
        method_label: approx.label().to_string(),
        t0,
        t,
    })
}

/// One `(ε, Δ)` sample of a scaling study.
#[derive(Debug, Clone, Copy)]
pub struct ScalingPoint {
    pub epsilon: f64,
    pub delta: f64,
}

/// Error-versus-ε samples with a fitted log–log slope.
#[derive(Debug, Clone)]
pub struct ScalingStudy {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `log10 Δ` against `log10 ε`.
    pub slope: f64,
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(CoreError::InsufficientPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, y)| {
            if x <= 0.0 || y <= 0.0 {
                Err(CoreError::InvalidInput(format!(
                    "log-log fit needs positive samples, got ({x}, {y})"
                )))
            } else {
                Ok((x.log10(), y.log10()))
            }
        })
        .collect::<Result<_>>()?;
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in logs {
        cov += (x - mean_x) * (y - mean_y);
        var += (x - mean_x) * (x - mean_x);
    }
    if var == 0.0 {
        return Err(CoreError::InvalidInput("degenerate abscissa in log-log fit".into()));
    }
    Ok(cov / var)
}

/// Default reference tolerance for scaling studies.
pub const SCALING_REFERENCE_TOL: f64 = 1e-12;

/// Evaluate one method across a family of problems differing only in ε and
/// fit the error order. The method builder receives the ε-substituted
/// problem; the reference is re-integrated per ε at tolerance
/// [`SCALING_REFERENCE_TOL`]. Errors are taken over the full pulse.
pub fn scaling_study<F>(problem: &SuddenProblem, epsilons: &[f64], method: F) -> Result<ScalingStudy>
where
    F: Fn(&SuddenProblem) -> Result<Propagator>,
{
    if epsilons.len() < 3 {
        return Err(CoreError::InsufficientPoints {
            needed: 3,
            got: epsilons.len(),
        });
    }
    if epsilons.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
        return Err(CoreError::InvalidInput(
            "scaling study needs positive finite epsilon values".into(),
        ));
    }
    let t0 = problem.pulse().t_start();
    let t = problem.pulse().t_end();
    let mut points = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let scaled = problem.with_epsilon(eps)?;
        let reference = reference_for_problem(&scaled, SCALING_REFERENCE_TOL)?;
        let approx = method(&scaled)?;
        let report = delta_error(&approx, &reference, t0, t)?;
        points.push(ScalingPoint {
            epsilon: eps,
            delta: report.delta,
        });
    }
    let slope = log_log_slope(
        &points
            .iter()
            .map(|p| (p.epsilon, p.delta))
            .collect::<Vec<_>>(),
    )?;
    Ok(ScalingStudy { points, slope })
}
