use std::fmt;
use std::ops::Mul;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{JsrError, Result};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense square complex matrix.
///
/// Matrices built through the checked constructors are square, non-empty
/// and have finite entries. Products formed internally may overflow to
/// non-finite values; callers that care check [`ComplexMatrix::is_finite`].
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 {
            return Err(JsrError::InvalidMatrix("matrix must be at least 1x1".into()));
        }
        if m.nrows() != m.ncols() {
            return Err(JsrError::InvalidMatrix(format!(
                "matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if let Some(pos) = m.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            let n = m.nrows();
            return Err(JsrError::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos % n,
                pos / n
            )));
        }
        Ok(Self(m))
    }

    /// Builds a matrix from complex rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(JsrError::InvalidMatrix("matrix must be at least 1x1".into()));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(JsrError::InvalidMatrix(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Builds a real matrix from row-major rows.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "dimension must be positive");
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "dimension must be positive");
        Self(DMatrix::zeros(n, n))
    }

    pub fn diagonal(entries: &[Complex64]) -> Result<Self> {
        let n = entries.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO }))
    }

    pub fn real_diagonal(entries: &[f64]) -> Result<Self> {
        let entries: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&entries)
    }

    /// Wraps a raw matrix that is known to be square and non-empty.
    pub(crate) fn from_inner(m: DMatrix<Complex64>) -> Self {
        debug_assert!(m.nrows() == m.ncols() && m.nrows() > 0);
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        Self(&self.0 * &rhs.0)
    }

    pub fn mul_vec(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        &self.0 * x
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        Self(&self.0 + &rhs.0)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        Self(&self.0 - &rhs.0)
    }

    pub fn scale(&self, alpha: Complex64) -> ComplexMatrix {
        Self(self.0.map(|z| z * alpha))
    }

    pub fn scale_real(&self, alpha: f64) -> ComplexMatrix {
        Self(self.0.map(|z| z * alpha))
    }

    /// Conjugate transpose A*.
    pub fn adjoint(&self) -> ComplexMatrix {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self(self.0.transpose())
    }

    pub fn conjugate(&self) -> ComplexMatrix {
        Self(self.0.map(|z| z.conj()))
    }

    /// Entry-wise modulus.
    pub fn abs(&self) -> ComplexMatrix {
        Self(self.0.map(|z| Complex64::new(z.norm(), 0.0)))
    }

    /// A^k by repeated left-to-right multiplication; A^0 = I.
    pub fn pow(&self, k: usize) -> ComplexMatrix {
        let mut p = Self::identity(self.dim());
        for _ in 0..k {
            p = p.mul(self);
        }
        p
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.0.iter().all(|z| z.im.abs() <= tol)
    }

    /// Largest entry-wise distance to `other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Inverse by LU with partial pivoting.
    pub fn inverse(&self) -> Result<ComplexMatrix> {
        self.0
            .clone()
            .try_inverse()
            .filter(|inv| inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
            .map(Self)
            .ok_or_else(|| JsrError::SingularTransform("matrix is not invertible".into()))
    }

    /// Off-diagonal block `rows x cols` starting at `(r0, c0)` as a raw matrix.
    pub(crate) fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> DMatrix<Complex64> {
        self.0.view((r0, c0), (rows, cols)).into_owned()
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::mul(self, rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{:?}", self.rows())
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
