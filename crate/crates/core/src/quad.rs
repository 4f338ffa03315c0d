//! Composite Gauss–Legendre quadrature for operator-valued integrands.
//!
//! The integrands in this crate are smooth (the pulse envelope is C-infinity
//! inside its support), so a fixed-order composite rule with panel doubling
//! until two successive estimates agree is accurate and cheap.

use crate::error::{CoreError, Result};
use crate::linalg::ComplexMatrix;

// Gauss–Legendre nodes (positive half) and weights on [-1, 1].
const GL4_NODES: [f64; 2] = [0.3399810435848563, 0.8611363115940526];
const GL4_WEIGHTS: [f64; 2] = [0.6521451548625461, 0.3478548451374538];

const GL8_NODES: [f64; 4] = [
    0.1834346424956498,
    0.525532409916329,
    0.7966664774136267,
    0.9602898564975362,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362683783378362,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

const GL16_NODES: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.755404408355003,
    0.8656312023878317,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_WEIGHTS: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950022,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

fn rule(order: usize) -> Result<(&'static [f64], &'static [f64])> {
    match order {
        4 => Ok((&GL4_NODES, &GL4_WEIGHTS)),
        8 => Ok((&GL8_NODES, &GL8_WEIGHTS)),
        16 => Ok((&GL16_NODES, &GL16_WEIGHTS)),
        other => Err(CoreError::InvalidInput(format!(
            "quadrature order must be 4, 8 or 16, got {other}"
        ))),
    }
}

/// Full node/weight list on [-1, 1] in ascending node order.
pub(crate) fn nodes_ascending(order: usize) -> Result<Vec<(f64, f64)>> {
    let (half_nodes, half_weights) = rule(order)?;
    let mut out = Vec::with_capacity(order);
    for (x, w) in half_nodes.iter().zip(half_weights).rev() {
        out.push((-x, *w));
    }
    for (x, w) in half_nodes.iter().zip(half_weights) {
        out.push((*x, *w));
    }
    Ok(out)
}

/// Panel-doubling policy for the composite rule.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub panels: usize,
    pub order: usize,
    /// Stop once successive estimates differ (entrywise) by less than this.
    pub tol: f64,
    pub max_doublings: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            panels: 64,
            order: 8,
            tol: 1e-10,
            max_doublings: 4,
        }
    }
}

/// Single composite Gauss–Legendre pass with `panels` equal panels.
pub fn composite_matrix<F>(f: &F, a: f64, b: f64, panels: usize, order: usize) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> Result<ComplexMatrix> + ?Sized,
{
    let (nodes, weights) = rule(order)?;
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut sum: Option<ComplexMatrix> = None;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        for (&x, &w) in nodes.iter().zip(weights) {
            for s in [mid - half * x, mid + half * x] {
                let value = f(s)?;
                let weighted = value.scale_re(w * half);
                sum = Some(match sum {
                    Some(acc) => acc.add(&weighted),
                    None => weighted,
                });
            }
        }
    }
    sum.ok_or_else(|| CoreError::InvalidInput("empty quadrature".into()))
}

/// Composite Gauss–Legendre with panel doubling until two successive
/// estimates agree entrywise within `config.tol`.
pub fn integrate_matrix<F>(f: &F, a: f64, b: f64, config: &QuadratureConfig) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> Result<ComplexMatrix> + ?Sized,
{
    if a == b {
        let probe = f(a)?;
        return Ok(ComplexMatrix::zeros(probe.dim()));
    }
    if b < a {
        let reversed = integrate_matrix(f, b, a, config)?;
        return Ok(reversed.scale_re(-1.0));
    }

    let mut panels = config.panels.max(4);
    let mut estimate = composite_matrix(f, a, b, panels, config.order)?;
    let mut achieved = f64::INFINITY;
    for _ in 0..config.max_doublings {
        panels *= 2;
        let refined = composite_matrix(f, a, b, panels, config.order)?;
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

/// Scalar convenience wrapper over [`integrate_matrix`].
pub fn integrate_scalar<F>(f: &F, a: f64, b: f64, config: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let wrapped = |t: f64| {
        let mut m = ComplexMatrix::zeros(1);
        m.set(0, 0, num_complex::Complex64::new(f(t), 0.0));
        Ok(m)
    };
    Ok(integrate_matrix(&wrapped, a, b, config)?.get(0, 0).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order4_is_exact_for_degree_seven() {
        // 2n−1 = 7 for n = 4 points.
        let value = composite_matrix(
            &|t: f64| {
                let mut m = ComplexMatrix::zeros(1);
                m.set(0, 0, num_complex::Complex64::new(t.powi(7), 0.0));
                Ok(m)
            },
            0.0,
            1.0,
            1,
            4,
        )
        .unwrap();
        assert!((value.get(0, 0).re - 0.125).abs() < 1e-15);
    }

    #[test]
    fn integrates_sin_squared_pulse() {
        let config = QuadratureConfig::default();
        let value = integrate_scalar(
            &|t: f64| 2.0 * (std::f64::consts::PI * t).sin().powi(2),
            0.0,
            1.0,
            &config,
        )
        .unwrap();
        assert!((value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_interval_flips_sign() {
        let config = QuadratureConfig::default();
        let forward = integrate_scalar(&|t: f64| t.exp(), 0.0, 1.0, &config).unwrap();
        let backward = integrate_scalar(&|t: f64| t.exp(), 1.0, 0.0, &config).unwrap();
        assert!((forward + backward).abs() < 1e-13);
        assert!((forward - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn empty_interval_is_zero() {
        let config = QuadratureConfig::default();
        let value = integrate_scalar(&|t: f64| t.cos(), 0.3, 0.3, &config).unwrap();
        assert_eq!(value, 0.0);
    }

    #[test]
    fn rejects_unsupported_order() {
        let config = QuadratureConfig { order: 5, ..Default::default() };
        let err = integrate_scalar(&|t: f64| t, 0.0, 1.0, &config).unwrap_err();
        assert!(matches!(err, CoreError::InvalidInput(_)));
    }

    #[test]
    fn reports_non_convergence_on_discontinuous_integrand() {
        // A step mid-panel shrinks the doubling gap only linearly; four
        // doublings cannot reach 1e-10.
        let config = QuadratureConfig::default();
        let err = integrate_scalar(
            &|t: f64| if t < std::f64::consts::FRAC_1_PI { 0.0 } else { 1.0 },
            0.0,
            1.0,
            &config,
        )
        .unwrap_err();
        match err {
            CoreError::QuadratureNoConvergence { achieved } => assert!(achieved > 1e-10),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn order16_handles_oscillatory_integrand() {
        let config = QuadratureConfig { order: 16, ..Default::default() };
        let value = integrate_scalar(&|t: f64| (20.0 * t).cos(), 0.0, 1.0, &config).unwrap();
        assert!((value - (20.0f64).sin() / 20.0).abs() < 1e-12);
    }
}
