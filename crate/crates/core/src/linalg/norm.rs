use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::eigen::{sigma1, spectral_radius};
use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{JsrError, Result};

/// Relative asymmetry accepted when checking that a matrix is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Relative reconstruction error accepted for `P = T*T`.
pub const CHOLESKY_RECONSTRUCTION_TOL: f64 = 1e-10;

/// Upper-triangular Cholesky factor `T` of a Hermitian positive definite
/// matrix, with `P = T*T` and a strictly positive real diagonal.
pub fn cholesky(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = p.dim();
    let asym = p.max_abs_diff(&p.adjoint());
    let scale = row_sum_norm(p).max(f64::MIN_POSITIVE);
    if asym > HERMITIAN_TOL * scale {
        return Err(JsrError::NotHermitian { asymmetry: asym });
    }
    let max_diag = (0..n).map(|i| p.get(i, i).re.abs()).fold(0.0, f64::max);
    let pivot_tol = n as f64 * f64::EPSILON * max_diag;
    let mut t = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        let d = p.get(j, j).re - (0..j).map(|k| t[(k, j)].norm_sqr()).sum::<f64>();
        if !(d > pivot_tol) {
            return Err(JsrError::NotPositiveDefinite { pivot: j, value: d });
        }
        let tjj = d.sqrt();
        t[(j, j)] = Complex64::new(tjj, 0.0);
        for i in j + 1..n {
            let s: Complex64 = (0..j).map(|k| t[(k, j)].conj() * t[(k, i)]).sum();
            t[(j, i)] = (p.get(j, i) - s) / tjj;
        }
    }
    Ok(ComplexMatrix::from_inner(t))
}

/// Inverse of a nonsingular upper-triangular matrix by back substitution.
pub(crate) fn upper_triangular_inverse(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = t.dim();
    let mut inv = DMatrix::<Complex64>::zeros(n, n);
    for col in 0..n {
        for i in (0..=col).rev() {
            let rhs = if i == col { Complex64::new(1.0, 0.0) } else { ZERO };
            let s: Complex64 = (i + 1..=col).map(|k| t.get(i, k) * inv[(k, col)]).sum();
            let d = t.get(i, i);
            if d.norm() == 0.0 {
                return Err(JsrError::InvariantViolation("singular triangular factor".into()));
            }
            inv[(i, col)] = (rhs - s) / d;
        }
    }
    Ok(ComplexMatrix::from_inner(inv))
}

/// Hermitian positive definite `P` together with its Cholesky factor; the
/// pair defines the vector norm `‖x‖_P = sqrt(x*Px) = ‖Tx‖₂`.
#[derive(Clone, PartialEq)]
pub struct EllipsoidalShape {
    p: ComplexMatrix,
    t: ComplexMatrix,
    t_inv: ComplexMatrix,
}

impl EllipsoidalShape {
    pub fn new(p: ComplexMatrix) -> Result<Self> {
        let t = cholesky(&p)?;
        // keep the exactly Hermitian part
        let p = ComplexMatrix::from_inner((p.as_matrix() + p.as_matrix().adjoint()) * Complex64::new(0.5, 0.0));
        let recon = t.adjoint().mul(&t);
        let err = row_sum_norm(&p.sub(&recon));
        if err > CHOLESKY_RECONSTRUCTION_TOL * row_sum_norm(&p) {
            return Err(JsrError::InvariantViolation(format!(
                "Cholesky reconstruction error {err:e} too large"
            )));
        }
        let t_inv = upper_triangular_inverse(&t)?;
        Ok(Self { p, t, t_inv })
    }

    pub fn identity(n: usize) -> Self {
        let i = ComplexMatrix::identity(n);
        Self { p: i.clone(), t: i.clone(), t_inv: i }
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn p(&self) -> &ComplexMatrix {
        &self.p
    }

    /// Upper-triangular factor with `P = T*T`.
    pub fn factor(&self) -> &ComplexMatrix {
        &self.t
    }

    pub fn factor_inverse(&self) -> &ComplexMatrix {
        &self.t_inv
    }

    pub fn vector_norm(&self, x: &DVector<Complex64>) -> f64 {
        self.t.mul_vec(x).norm()
    }

    /// `T A T⁻¹`, the matrix whose spectral norm is `‖A‖_P`.
    pub fn transform(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.t.mul(a).mul(&self.t_inv)
    }
}

impl fmt::Debug for EllipsoidalShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EllipsoidalShape").field("p", &self.p).finish()
    }
}

/// Induced matrix norms available to the bounds engine.
#[derive(Clone, Debug, PartialEq)]
pub enum NormKind {
    /// Maximum column sum, the norm induced by the vector 1-norm.
    ColumnSum,
    /// Largest singular value.
    Spectral,
    /// Maximum row sum, the norm induced by the vector ∞-norm.
    RowSum,
    Ellipsoidal(EllipsoidalShape),
}

impl NormKind {
    /// The three norms used when none are specified.
    pub fn standard() -> Vec<NormKind> {
        vec![NormKind::RowSum, NormKind::Spectral, NormKind::ColumnSum]
    }

    pub fn label(&self) -> &'static str {
        match self {
            NormKind::ColumnSum => "col",
            NormKind::Spectral => "spectral",
            NormKind::RowSum => "row",
            NormKind::Ellipsoidal(_) => "ellipsoidal",
        }
    }

    /// Parses one of the standard norm labels (`row`, `spectral`, `col`, and
    /// the aliases `inf`, `2`, `1`).
    pub fn parse_standard(s: &str) -> Option<NormKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "row" | "rowsum" | "inf" => Some(NormKind::RowSum),
            "spectral" | "2" | "two" => Some(NormKind::Spectral),
            "col" | "column" | "colsum" | "1" | "one" => Some(NormKind::ColumnSum),
            _ => None,
        }
    }
}

pub(crate) fn row_sum_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j).norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn column_sum_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    (0..n)
        .map(|j| (0..n).map(|i| a.get(i, j).norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Operator norm of `a` induced by `kind`.
pub fn operator_norm(a: &ComplexMatrix, kind: &NormKind) -> Result<f64> {
    match kind {
        NormKind::ColumnSum => Ok(column_sum_norm(a)),
        NormKind::RowSum => Ok(row_sum_norm(a)),
        NormKind::Spectral => sigma1(a),
        NormKind::Ellipsoidal(shape) => {
            if shape.dim() != a.dim() {
                return Err(JsrError::DimensionMismatch { expected: a.dim(), got: shape.dim() });
            }
            sigma1(&shape.transform(a))
        }
    }
}

/// `‖A‖_P` through the spectrum: `sqrt(ρ(A P⁻¹ A* P))`. Independent of the
/// Cholesky route used by [`operator_norm`].
pub fn ellipsoidal_norm_via_spectrum(a: &ComplexMatrix, p: &ComplexMatrix) -> Result<f64> {
    if p.dim() != a.dim() {
        return Err(JsrError::DimensionMismatch { expected: a.dim(), got: p.dim() });
    }
    let p_inv = p.inverse()?;
    let m = a.mul(&p_inv).mul(&a.adjoint()).mul(p);
    Ok(spectral_radius(&m)?.sqrt())
}
