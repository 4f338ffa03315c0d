//! Pulses and the nondimensionalized sudden-regime problem.
//!
//! The dynamics are driven by a pulse envelope that multiplies a fixed
//! coupling operator, plus a static operator weighted by the sudden
//! parameter. Everything is dimensionless: physical scales are converted
//! before construction, so time runs over the pulse support (by default
//! `[0, 1]`).

use crate::error::{CoreError, Result};
use crate::linalg::ComplexMatrix;

/// Envelope family of a pulse.
///
/// `Sin2` is the production shape; `Constant` exists for tests where every
/// quantity has a pencil-and-paper value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseShape {
    /// `Ω(t) = (2A/T) sin²(π (t − t_i)/T)` on the support, `T = t_f − t_i`.
    Sin2,
    /// `Ω(t) = A / (t_f − t_i)` on the support.
    Constant,
}

/// Pulse envelope with support `[t_i, t_f]` and area `A = ∫ Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    shape: PulseShape,
    area: f64,
    t_start: f64,
    t_end: f64,
}

impl Pulse {
    pub fn new(shape: PulseShape, area: f64, t_start: f64, t_end: f64) -> Result<Self> {
        if !(area.is_finite() && t_start.is_finite() && t_end.is_finite()) {
            return Err(CoreError::InvalidInput("pulse parameters must be finite".into()));
        }
        if t_start >= t_end {
            return Err(CoreError::InvalidInput(format!(
                "pulse support must be a proper interval, got [{t_start}, {t_end}]"
            )));
        }
        Ok(Self { shape, area, t_start, t_end })
    }

    /// `sin²` pulse with unit support `[0, 1]`.
    pub fn sin2(area: f64) -> Self {
        Self::new(PulseShape::Sin2, area, 0.0, 1.0).expect("unit support is valid")
    }

    pub fn shape(&self) -> PulseShape {
        self.shape
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Envelope value `Ω(t)`; exactly zero outside the support.
    pub fn value(&self, t: f64) -> f64 {
        if t < self.t_start || t > self.t_end {
            return 0.0;
        }
        let width = self.t_end - self.t_start;
        let u = (t - self.t_start) / width;
        match self.shape {
            PulseShape::Sin2 => {
                let s = (std::f64::consts::PI * u).sin();
                2.0 * self.area / width * s * s
            }
            PulseShape::Constant => self.area / width,
        }
    }

    /// Cumulative phase from the start of the support, clamped outside it.
    ///
    /// For `Sin2` this is the closed antiderivative `A (u − sin(2πu)/(2π))`
    /// in the scaled variable `u`.
    fn phase_from_start(&self, t: f64) -> f64 {
        let width = self.t_end - self.t_start;
        let u = ((t - self.t_start) / width).clamp(0.0, 1.0);
        match self.shape {
            PulseShape::Sin2 => {
                let two_pi = 2.0 * std::f64::consts::PI;
                self.area * (u - (two_pi * u).sin() / two_pi)
            }
            PulseShape::Constant => self.area * u,
        }
    }

    /// Accumulated phase `θ(t, t0) = ∫_{t0}^{t} Ω(u) du`.
    ///
    /// Computed as a difference of antiderivatives, so the additivity
    /// `θ(t2, t0) = θ(t2, t1) + θ(t1, t0)` holds exactly.
    pub fn phase(&self, t0: f64, t: f64) -> f64 {
        self.phase_from_start(t) - self.phase_from_start(t0)
    }
}

/// The nondimensionalized short-pulse problem.
///
/// The generator of the dynamics is `Ω(t)·coupling + ε·static`: the pulse
/// term plays the role of the reference Hamiltonian and the static operator
/// is the perturbation, weighted by the sudden parameter `ε`.
#[derive(Debug, Clone)]
pub struct SuddenProblem {
    pulse: Pulse,
    coupling_operator: ComplexMatrix,
    static_operator: ComplexMatrix,
    epsilon: f64,
}

impl SuddenProblem {
    pub fn new(
        pulse: Pulse,
        coupling_operator: ComplexMatrix,
        static_operator: ComplexMatrix,
        epsilon: f64,
    ) -> Result<Self> {
        if coupling_operator.dim() != static_operator.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: coupling_operator.dim(),
                actual: static_operator.dim(),
            });
        }
        for (name, op) in [("coupling", &coupling_operator), ("static", &static_operator)] {
            let defect = op.hermiticity_defect();
            if defect > crate::linalg::HERMITICITY_TOL {
                return Err(CoreError::InvalidInput(format!(
                    "{name} operator is not Hermitian (defect {defect:.3e})"
                )));
            }
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(CoreError::InvalidInput(format!(
                "sudden parameter must be finite and non-negative, got {epsilon}"
            )));
        }
        Ok(Self { pulse, coupling_operator, static_operator, epsilon })
    }

    /// The two-level setup used throughout the figures: a `sin²` pulse on
    /// `σ1` with the static perturbation `σ3`.
    pub fn two_level(area: f64, epsilon: f64) -> Self {
        Self::new(
            Pulse::sin2(area),
            ComplexMatrix::pauli_x(),
            ComplexMatrix::pauli_z(),
            epsilon,
        )
        .expect("Pauli setup is valid")
    }

    pub fn pulse(&self) -> &Pulse {
        &self.pulse
    }

    pub fn coupling_operator(&self) -> &ComplexMatrix {
        &self.coupling_operator
    }

    pub fn static_operator(&self) -> &ComplexMatrix {
        &self.static_operator
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.coupling_operator.dim()
    }

    /// Copy of the problem with a different sudden parameter, for scaling
    /// studies over ε.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(
            self.pulse,
            self.coupling_operator.clone(),
            self.static_operator.clone(),
            epsilon,
        )
    }

    /// Full generator `H(t) = Ω(t)·coupling + ε·static`.
    pub fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        self.coupling_operator
            .scale_re(self.pulse.value(t))
            .add(&self.static_operator.scale_re(self.epsilon))
    }
}
