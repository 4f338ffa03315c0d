//! Optimized time-dependent perturbation theory for pulse-driven quantum
//! systems.
//!
//! The crate builds unitary approximations to the propagator of a pulsed
//! two-level (or small n-level) problem by iterating compatible-part /
//! generator transformations whose residual order squares at every step, and
//! exposes the free secular-time parameters those transformations carry. The
//! headline feature is picking those parameters by minimizing an eigenvalue
//! objective computed without the exact solution, then benchmarking the
//! result against Dyson and Magnus expansions and a high-accuracy reference
//! integration.
//!
//! Modules:
//! * [`linalg`] — small dense complex matrices, exponentials, eigenvalues.
//! * [`model`] — pulse envelopes and the nondimensionalized problem.
//! * [`quad`] — composite Gauss–Legendre quadrature with panel doubling.
//! * [`propagator`] — closed-form, ODE-reference and composed propagators.
//! * [`kam`] — the iteration chain: compatible parts, generators, remainders,
//!   the eigenvalue objective and the n-step approximant.
//! * [`baselines`] — Dyson and Magnus expansions in the interaction picture.
//! * [`optimize`] — grid scan plus golden-section refinement of the
//!   eigenvalue objective.
//! * [`metrics`] — operator-norm error reports and scaling studies.

pub mod baselines;
pub mod error;
pub mod kam;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod optimize;
pub mod propagator;
pub mod quad;

pub use error::{CoreError, Result};
pub use linalg::ComplexMatrix;
pub use model::{Pulse, PulseShape, SuddenProblem};
pub use propagator::{Propagator, PropagatorKind};

pub use num_complex;
