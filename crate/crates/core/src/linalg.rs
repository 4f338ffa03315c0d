//! Small dense complex matrix algebra.
//!
//! Everything here operates on [`ComplexMatrix`], a row-major dense square
//! matrix of `Complex64`. The dimensions of interest are tiny (2 for the
//! two-level illustration), so the implementations favour closed forms and
//! simplicity over asymptotic performance: the 2x2 matrix exponential uses
//! the Pauli decomposition, 2x2 Hermitian eigenvalues come from trace and
//! determinant, and larger dimensions fall back to scaled Taylor series and
//! cyclic Jacobi sweeps.

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Tolerance for treating a matrix as Hermitian, matched to the accuracy
/// the quadrature layers deliver (near 1e-12).
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Dense square complex matrix in row-major layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    /// Identity matrix of dimension `dim`.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a row-major entry vector; `entries.len()` must be a square.
    pub fn from_vec(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(CoreError::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Ok(Self { dim, data: entries })
    }

    /// Pauli matrix sigma_x.
    pub fn pauli_x() -> Self {
        Self {
            dim: 2,
            data: vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        }
    }

    /// Pauli matrix sigma_y.
    pub fn pauli_y() -> Self {
        Self {
            dim: 2,
            data: vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        }
    }

    /// Pauli matrix sigma_z.
    pub fn pauli_z() -> Self {
        Self {
            dim: 2,
            data: vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-1.0, 0.0),
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Matrix product; panics on dimension mismatch (callers validate at the
    /// module boundary).
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o += r;
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(&rhs.data) {
            *o -= r;
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for o in out.data.iter_mut() {
            *o *= factor;
        }
        out
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// In-place accumulate `self += factor * rhs`.
    pub fn add_scaled_assign(&mut self, rhs: &Self, factor: Complex64) {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        for (o, r) in self.data.iter_mut().zip(&rhs.data) {
            *o += factor * r;
        }
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Entrywise largest modulus of `A - A†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                defect = defect.max(d);
            }
        }
        defect
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Entrywise largest modulus of `A†A - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim;
        let product = self.adjoint().mul(self);
        product.sub(&Self::identity(n)).max_abs()
    }
}

/// Commutator `[a, b] = ab − ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() != b.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(a.mul(b).sub(&b.mul(a)))
}

/// Matrix exponential `exp(a)`.
///
/// For dim = 2 the Pauli decomposition gives a closed form exact up to
/// rounding; larger dimensions use scaling followed by a 20-term Taylor
/// series and repeated squaring.
pub fn matexp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_finite() {
        return Err(CoreError::NonFinite);
    }
    if a.dim() == 2 {
        Ok(exp_2x2(a))
    } else {
        Ok(exp_taylor_scaled(a))
    }
}

/// Closed-form exponential of a 2x2 complex matrix.
///
/// Writes `a = c0 I + c·σ` and uses `(c·σ)² = r² I` with `r² = c1²+c2²+c3²`:
/// `exp(a) = e^{c0} (cosh r · I + sinh(r)/r · c·σ)`. Both `cosh r` and
/// `sinh(r)/r` are even in `r`, so the branch of the complex square root is
/// irrelevant.
fn exp_2x2(a: &ComplexMatrix) -> ComplexMatrix {
    let half = Complex64::new(0.5, 0.0);
    let a00 = a.get(0, 0);
    let a01 = a.get(0, 1);
    let a10 = a.get(1, 0);
    let a11 = a.get(1, 1);

    let c0 = (a00 + a11) * half;
    let c1 = (a01 + a10) * half;
    let c2 = (a10 - a01) * half * Complex64::new(0.0, -1.0);
    let c3 = (a00 - a11) * half;

    let r2 = c1 * c1 + c2 * c2 + c3 * c3;
    let r = r2.sqrt();

    let (cosh_r, sinhc_r) = if r.norm() < 1e-6 {
        // Series in r²; truncation error below 1e-38 at this threshold.
        let cosh = Complex64::new(1.0, 0.0) + r2 / 2.0 + r2 * r2 / 24.0 + r2 * r2 * r2 / 720.0;
        let sinhc = Complex64::new(1.0, 0.0) + r2 / 6.0 + r2 * r2 / 120.0 + r2 * r2 * r2 / 5040.0;
        (cosh, sinhc)
    } else {
        (r.cosh(), r.sinh() / r)
    };

    let phase = c0.exp();
    let d00 = phase * (cosh_r + sinhc_r * c3);
    let d01 = phase * sinhc_r * (c1 - Complex64::new(0.0, 1.0) * c2);
    let d10 = phase * sinhc_r * (c1 + Complex64::new(0.0, 1.0) * c2);
    let d11 = phase * (cosh_r - sinhc_r * c3);

    ComplexMatrix {
        dim: 2,
        data: vec![d00, d01, d10, d11],
    }
}

/// Scaling-and-squaring with a 20-term Taylor series for dim > 2.
fn exp_taylor_scaled(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let norm = matrix_1_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scale_re(1.0 / f64::powi(2.0, squarings as i32));

    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=20 {
        term = term.mul(&scaled).scale_re(1.0 / k as f64);
        result = result.add(&term);
    }
    for _ in 0..squarings {
        result = result.mul(&result);
    }
    result
}

/// Max column sum of moduli.
fn matrix_1_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    (0..n)
        .map(|j| (0..n).map(|i| a.get(i, j).norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Real eigenvalues of a Hermitian matrix, sorted ascending.
///
/// dim = 2 is solved in closed form from trace and determinant; larger
/// dimensions run cyclic complex Jacobi sweeps.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if !a.is_finite() {
        return Err(CoreError::NonFinite);
    }
    let defect = a.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(CoreError::NotHermitian {
            defect,
            tolerance: HERMITICITY_TOL,
        });
    }
    if a.dim() == 2 {
        let mean = 0.5 * (a.get(0, 0).re + a.get(1, 1).re);
        let half_gap = 0.5 * (a.get(0, 0).re - a.get(1, 1).re);
        let disc = (half_gap * half_gap + a.get(0, 1).norm_sqr()).sqrt();
        Ok(vec![mean - disc, mean + disc])
    } else {
        Ok(jacobi_eigenvalues(a))
    }
}

/// Cyclic complex Jacobi eigenvalue iteration for Hermitian matrices.
fn jacobi_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.dim();
    // Work on the symmetrized copy so tiny Hermiticity defects cannot grow.
    let mut m = a.add(&a.adjoint()).scale_re(0.5);
    let scale = m.max_abs().max(1.0);

    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m.get(p, q).norm());
            }
        }
        if off < 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                // Phase rotation making the pivot real, then a real Jacobi
                // rotation annihilating it.
                let phase = apq / apq.norm();
                let g = apq.norm();
                let theta = 0.5 * (2.0 * g).atan2(aqq - app);
                let c = theta.cos();
                let s = theta.sin();

                // Columns of A·J: [p] <- c·[p] − s·conj(phase)·[q]; [q] <- s·phase·[p] + c·[q]
                for i in 0..n {
                    let aip = m.get(i, p);
                    let aiq = m.get(i, q);
                    m.set(i, p, aip * c - aiq * phase.conj() * s);
                    m.set(i, q, aip * phase * s + aiq * c);
                }
                // Rows of J†·(A·J): the conjugate-transposed update.
                for j in 0..n {
                    let apj = m.get(p, j);
                    let aqj = m.get(q, j);
                    m.set(p, j, apj * c - aqj * phase * s);
                    m.set(q, j, apj * phase.conj() * s + aqj * c);
                }
            }
        }
    }

    let mut eigs: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Spectral norm: the largest singular value, computed as the square root of
/// the largest eigenvalue of `A†A`.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_finite() {
        return Err(CoreError::NonFinite);
    }
    let gram = a.adjoint().mul(a);
    let eigs = if gram.dim() == 2 {
        let mean = 0.5 * (gram.get(0, 0).re + gram.get(1, 1).re);
        let half_gap = 0.5 * (gram.get(0, 0).re - gram.get(1, 1).re);
        let disc = (half_gap * half_gap + gram.get(0, 1).norm_sqr()).sqrt();
        vec![mean - disc, mean + disc]
    } else {
        jacobi_eigenvalues(&gram)
    };
    let top = eigs.last().copied().unwrap_or(0.0).max(0.0);
    Ok(top.sqrt())
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn largest_abs_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    let eigs = hermitian_eigenvalues(a)?;
    Ok(eigs.iter().fold(0.0f64, |acc, &e| acc.max(e.abs())))
}
