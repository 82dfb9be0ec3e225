use super::eigen::spectral_radius;
use super::matrix::ComplexMatrix;
use super::norm::{operator_norm, row_sum_norm, NormKind};
use crate::error::{JsrError, Result};

/// Default horizon for [`power_bounded_probe`].
pub const DEFAULT_PROBE_HORIZON: usize = 200;
/// Default cap on `‖(A/ρ)^k‖∞` for [`power_bounded_probe`].
pub const DEFAULT_PROBE_CAP: f64 = 1e6;

fn checked_power(a: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    if k == 0 {
        return Err(JsrError::Domain("power must be at least 1".into()));
    }
    let mut p = a.clone();
    for step in 2..=k {
        p = p.mul(a);
        if !p.is_finite() {
            return Err(JsrError::Overflow { k: step });
        }
    }
    Ok(p)
}

/// Normalized norm `‖A^k‖^{1/k}`.
pub fn gelfand_estimate(a: &ComplexMatrix, k: usize, kind: &NormKind) -> Result<f64> {
    let p = checked_power(a, k)?;
    let v = operator_norm(&p, kind)?;
    if !v.is_finite() {
        return Err(JsrError::Overflow { k });
    }
    Ok(v.powf(1.0 / k as f64))
}

/// `|tr(A^k)|^{1/k}`.
pub fn trace_estimate(a: &ComplexMatrix, k: usize) -> Result<f64> {
    let p = checked_power(a, k)?;
    let t = p.trace().norm();
    if !t.is_finite() {
        return Err(JsrError::Overflow { k });
    }
    Ok(t.powf(1.0 / k as f64))
}

/// True iff every entry is real and `≥ -tol` and every row sums to 1 within `tol`.
pub fn is_row_stochastic(a: &ComplexMatrix, tol: f64) -> bool {
    let n = a.dim();
    (0..n).all(|i| {
        let row_ok = (0..n).all(|j| {
            let z = a.get(i, j);
            z.im.abs() <= tol && z.re >= -tol
        });
        let sum: f64 = (0..n).map(|j| a.get(i, j).re).sum();
        row_ok && (sum - 1.0).abs() <= tol
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerBound {
    Bounded,
    /// First power whose normalized ∞-norm exceeded the cap.
    Exceeded(usize),
}

/// Checks whether `‖(A/ρ(A))^k‖∞ ≤ cap` for all `k ≤ horizon`.
pub fn power_bounded_probe(a: &ComplexMatrix, horizon: usize, cap: f64) -> Result<PowerBound> {
    let rho = spectral_radius(a)?;
    if rho == 0.0 {
        return Err(JsrError::Degenerate(
            "spectral radius is zero (nilpotent matrix); powers vanish eventually".into(),
        ));
    }
    let b = a.scale_real(1.0 / rho);
    let mut p = b.clone();
    for k in 1..=horizon {
        if k > 1 {
            p = p.mul(&b);
        }
        let v = row_sum_norm(&p);
        if !v.is_finite() || v > cap {
            return Ok(PowerBound::Exceeded(k));
        }
    }
    Ok(PowerBound::Bounded)
}
