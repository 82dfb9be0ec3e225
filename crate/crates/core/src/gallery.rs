//! Reference families with known spectral radius behavior.

use std::f64::consts::PI;

use crate::error::{JsrError, Result};
use crate::family::MatrixFamily;
use crate::inclusion::{DeltaNorm, PerturbedSystem};
use crate::linalg::ComplexMatrix;

fn real2(a: f64, b: f64, c: f64, d: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[[a, b], [c, d]]).expect("finite entries")
}

fn labelled(name: String, members: Vec<ComplexMatrix>) -> Result<MatrixFamily> {
    let labels = vec!["A".to_string(), "B".to_string()];
    MatrixFamily::with_labels(name, members, labels)
}

/// `{[[1,1],[0,1]], α·[[1,0],[1,1]]}`. For `α = 1` the spectral radius is
/// the golden ratio, attained by the product of the two members.
pub fn blondel(alpha: f64) -> Result<MatrixFamily> {
    if !alpha.is_finite() {
        return Err(JsrError::Domain(format!("alpha must be finite, got {alpha}")));
    }
    labelled(format!("blondel(alpha={alpha})"), vec![real2(1.0, 1.0, 0.0, 1.0), real2(alpha, 0.0, alpha, alpha)])
}

/// `{α^k [[0,0],[1,0]], α⁻¹ R}` with `R` the rotation by `−π/(2k)`. For
/// `1 < α < 1/cos(π/(2k))` the spectral radius is 1 and the shortest
/// product attaining it has length `k + 1`.
pub fn berger_wang(k: u32, alpha: f64) -> Result<MatrixFamily> {
    if k == 0 {
        return Err(JsrError::Domain("k must be at least 1".into()));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(JsrError::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let t = PI / (2.0 * k as f64);
    let a = real2(0.0, 0.0, alpha.powi(k as i32), 0.0);
    let b = real2(t.cos(), t.sin(), -t.sin(), t.cos()).scale_real(1.0 / alpha);
    labelled(format!("berger-wang(k={k},alpha={alpha})"), vec![a, b])
}

/// Two row-stochastic matrices with dyadic entries, so every product stays
/// exactly row-stochastic in floating point.
pub fn stochastic_demo() -> MatrixFamily {
    labelled("stochastic".into(), vec![real2(0.5, 0.5, 0.25, 0.75), real2(1.0, 0.0, 0.375, 0.625)])
        .expect("valid family")
}

/// `{[[a,b],[c,d]], [[a,−b],[−c,d]]}`.
pub fn sign_flip_pair(a: f64, b: f64, c: f64, d: f64) -> Result<MatrixFamily> {
    labelled(format!("sign-flip({a},{b},{c},{d})"), vec![real2(a, b, c, d), real2(a, -b, -c, d)])
}

/// `{[[a,b],[c,d]], [[d,c],[b,a]]}`.
pub fn swap_pair(a: f64, b: f64, c: f64, d: f64) -> Result<MatrixFamily> {
    labelled(format!("swap({a},{b},{c},{d})"), vec![real2(a, b, c, d), real2(d, c, b, a)])
}

/// `{A, A*}`.
pub fn conjugate_pair(a: &ComplexMatrix) -> Result<MatrixFamily> {
    labelled("conjugate-pair".into(), vec![a.clone(), a.adjoint()])
}

/// `{[[0,2],[0,0]], [[0,0],[2,0]]}`, spectral radius 2.
pub fn nilpotent_conjugate_pair() -> MatrixFamily {
    conjugate_pair(&real2(0.0, 2.0, 0.0, 0.0)).expect("valid family")
}

/// Nominal `0.5·I` perturbed along the coordinate swap; stable exactly for
/// uncertainty levels below 1/2.
pub fn swap_system() -> PerturbedSystem {
    PerturbedSystem::new(real2(0.5, 0.0, 0.0, 0.5), vec![real2(0.0, 1.0, 1.0, 0.0)], DeltaNorm::Infinity, 0.0)
        .expect("consistent dimensions")
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &["blondel", "berger-wang", "stochastic", "sign-flip", "swap", "conjugate-pair"];

/// Gallery parameters; unused ones are ignored by each family.
#[derive(Clone, Debug)]
pub struct GalleryParams {
    pub alpha: f64,
    pub k: u32,
    pub abcd: [f64; 4],
}

impl Default for GalleryParams {
    fn default() -> Self {
        Self { alpha: 1.0, k: 3, abcd: [2.0, 1.0, -1.0, 0.0] }
    }
}

pub fn by_name(name: &str, params: &GalleryParams) -> Result<MatrixFamily> {
    let [a, b, c, d] = params.abcd;
    match name {
        "blondel" => blondel(params.alpha),
        "berger-wang" => berger_wang(params.k, params.alpha),
        "stochastic" => Ok(stochastic_demo()),
        "thm4" | "sign-flip" => sign_flip_pair(a, b, c, d),
        "thm5" | "swap" => swap_pair(a, b, c, d),
        "conjugate-pair" => Ok(nilpotent_conjugate_pair()),
        other => Err(JsrError::Domain(format!("unknown gallery family {other:?}; known: {}", NAMES.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_row_stochastic, spectral_radius};

    #[test]
    fn blondel_at_one() {
        let f = blondel(1.0).unwrap();
        assert_eq!(f.member(0), &real2(1.0, 1.0, 0.0, 1.0));
        assert_eq!(f.member(1), &real2(1.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn berger_wang_product_of_length_k_plus_one() {
        let f = berger_wang(3, 1.1).unwrap();
        let b3 = f.member(1).pow(3);
        let p = f.member(0).mul(&b3);
        // A·B³ = [[0,0],[0,1]] up to rounding
        assert!(p.max_abs_diff(&real2(0.0, 0.0, 0.0, 1.0)) < 1e-12);
        assert!((spectral_radius(&p).unwrap() - 1.0).abs() < 1e-12);
        assert!(berger_wang(0, 1.1).is_err());
    }

    #[test]
    fn stochastic_products_stay_exact() {
        let f = stochastic_demo();
        let mut p = f.member(0).clone();
        for i in [1, 1, 0, 1, 0, 0, 1] {
            p = p.mul(f.member(i));
            assert!(is_row_stochastic(&p, 0.0));
        }
    }

    #[test]
    fn named_lookup() {
        for name in NAMES {
            assert!(by_name(name, &GalleryParams::default()).is_ok(), "{name}");
        }
        assert!(by_name("nope", &GalleryParams::default()).is_err());
    }
}
