//! Dense complex eigenvalues and singular values.
//!
//! Eigenvalues come from a Householder reduction to upper Hessenberg form
//! followed by single-shift complex QR sweeps (Wilkinson shifts, with an
//! exceptional shift every tenth sweep on a stalled block). Singular values
//! and null vectors use nalgebra's SVD.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ONE, ZERO};
use crate::error::{JsrError, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 120;
const SVD_MAX_ITER: usize = 2000;

/// All `n` eigenvalues of `a`, in no particular order.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = a.dim();
    if n == 1 {
        return Ok(vec![a.get(0, 0)]);
    }
    if !a.is_finite() {
        return Err(JsrError::ComputationFailure(
            "eigenvalues requested for a matrix with non-finite entries".into(),
        ));
    }
    let mut h = a.as_matrix().clone();
    reduce_to_hessenberg(&mut h);
    hessenberg_qr(&mut h)?;
    Ok((0..n).map(|i| h[(i, i)]).collect())
}

/// ρ(A) = max{|λ| : λ ∈ σ(A)}.
pub fn spectral_radius(a: &ComplexMatrix) -> Result<f64> {
    if is_upper_triangular_exact(a) {
        return Ok((0..a.dim()).map(|i| a.get(i, i).norm()).fold(0.0, f64::max));
    }
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn is_upper_triangular_exact(a: &ComplexMatrix) -> bool {
    let n = a.dim();
    (1..n).all(|i| (0..i).all(|j| a.get(i, j) == ZERO))
}

fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

fn reduce_to_hessenberg(h: &mut DMatrix<Complex64>) {
    let n = h.nrows();
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- (I - 2vv*) H
        for j in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * h[(k + 1 + t, j)]).sum();
            for (t, vt) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= *vt * dot * 2.0;
            }
        }
        // H <- H (I - 2vv*)
        for i in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vt)| h[(i, k + 1 + t)] * vt).sum();
            for (t, vt) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= dot * vt.conj() * 2.0;
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, ONE);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

fn wilkinson_shift(h: &DMatrix<Complex64>, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn hessenberg_qr(h: &mut DMatrix<Complex64>) -> Result<()> {
    let n = h.nrows();
    let eps = f64::EPSILON;
    let scale = h.iter().map(|z| abs1(*z)).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(());
    }
    let tiny = f64::MIN_POSITIVE / eps;
    let mut hi = n - 1;
    let mut sweeps = 0usize;
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    while hi > 0 {
        // Locate the start of the trailing unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let mut s = abs1(h[(lo - 1, lo - 1)]) + abs1(h[(lo, lo)]);
            if s == 0.0 {
                s = scale;
            }
            if abs1(h[(lo, lo - 1)]) <= (eps * s).max(tiny) {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            sweeps = 0;
            continue;
        }
        sweeps += 1;
        if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(JsrError::ComputationFailure(format!(
                "QR iteration did not converge for a {n}x{n} matrix"
            )));
        }
        let shift = if sweeps.is_multiple_of(10) {
            // Exceptional shift to break cycles (e.g. permutation matrices).
            let sub = h[(hi, hi - 1)].norm() + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + Complex64::new(0.75 * sub, 0.4375 * sub)
        } else {
            wilkinson_shift(h, hi)
        };

        for i in lo..=hi {
            h[(i, i)] -= shift;
        }
        rotations.clear();
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rotations.push((c, s));
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
        }
        for (idx, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + idx;
            for i in lo..=(k + 1).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(())
}

fn svd(m: DMatrix<Complex64>, vectors: bool) -> Result<SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    SVD::try_new(m, vectors, vectors, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| JsrError::ComputationFailure("SVD did not converge".into()))
}

/// Singular values of a (possibly rectangular) matrix, in descending order.
pub fn singular_values_of(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(JsrError::ComputationFailure("singular values of a non-finite matrix".into()));
    }
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut s: Vec<f64> = svd(m.clone(), false)?.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Largest singular value σ₁(A) = sqrt(ρ(AA*)).
pub fn sigma1(a: &ComplexMatrix) -> Result<f64> {
    let n = a.dim();
    if n == 1 {
        return Ok(a.get(0, 0).norm());
    }
    Ok(singular_values_of(a.as_matrix())?[0])
}

/// Unit vector spanning (approximately) the null space of `m`: the right
/// singular vector for the smallest singular value. Returns it together with
/// that singular value.
pub(crate) fn smallest_right_singular_vector(m: &DMatrix<Complex64>) -> Result<(DVector<Complex64>, f64)> {
    let decomposition = svd(m.clone(), true)?;
    let v_t = decomposition
        .v_t
        .as_ref()
        .ok_or_else(|| JsrError::ComputationFailure("SVD returned no right vectors".into()))?;
    let (idx, smin) = decomposition
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty singular values");
    let v = v_t.row(idx).transpose().map(|z| z.conj());
    Ok((v, smin))
}

/// Rotates `v` so that its first component with modulus above `1e-12·‖v‖`
/// is real and positive, and scales it to unit 2-norm.
pub fn normalize_phase(v: &DVector<Complex64>) -> DVector<Complex64> {
    let norm = v.norm();
    if norm == 0.0 {
        return v.clone();
    }
    let mut out = v / Complex64::new(norm, 0.0);
    if let Some(first) = out.iter().copied().find(|z| z.norm() > 1e-12) {
        let phase = first.conj() / first.norm();
        out.iter_mut().for_each(|z| *z *= phase);
    }
    out
}

/// Dominant eigenpair with a deterministic choice among eigenvalues of equal
/// modulus (within `1e-12` relative): prefer larger real part, then larger
/// imaginary part. The eigenvector has unit 2-norm and normalized phase.
pub fn dominant_eigenpair(a: &ComplexMatrix) -> Result<(Complex64, DVector<Complex64>)> {
    let eigs = eigenvalues(a)?;
    let rho = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = 1e-12 * rho.max(f64::MIN_POSITIVE);
    let lambda = eigs
        .iter()
        .copied()
        .filter(|z| z.norm() >= rho - tol)
        .max_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
        .expect("at least one eigenvalue");
    let v = eigenvector_for(a, lambda)?;
    Ok((lambda, v))
}

/// Unit eigenvector for the (approximate) eigenvalue `lambda`.
pub fn eigenvector_for(a: &ComplexMatrix, lambda: Complex64) -> Result<DVector<Complex64>> {
    let n = a.dim();
    let shifted = a.as_matrix() - DMatrix::<Complex64>::identity(n, n) * lambda;
    let (v, _) = smallest_right_singular_vector(&shifted)?;
    Ok(normalize_phase(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn spectral_radius_examples() {
        for n in 1..6 {
            assert_eq!(spectral_radius(&ComplexMatrix::identity(n)).unwrap(), 1.0);
        }
        assert_eq!(spectral_radius(&real(&[&[0.0, 1.0], &[0.0, 0.0]])).unwrap(), 0.0);
        let golden_sq = (3.0 + 5f64.sqrt()) / 2.0;
        let r = spectral_radius(&real(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert!((r - golden_sq).abs() < 1e-12, "{r}");
    }

    #[test]
    fn cyclic_permutations_converge() {
        for n in 2..12 {
            let p = ComplexMatrix::new(DMatrix::from_fn(n, n, |i, j| c(if (i + 1) % n == j { 1.0 } else { 0.0 })))
                .unwrap();
            let eigs = eigenvalues(&p).unwrap();
            for z in &eigs {
                assert!((z.norm() - 1.0).abs() < 1e-12, "n={n} {z}");
                // every eigenvalue is an n-th root of unity
                assert!((z.powu(n as u32) - ONE).norm() < 1e-10, "n={n} {z}");
            }
        }
    }

    #[test]
    fn rotation_and_jordan() {
        let t = std::f64::consts::PI / 7.0;
        let r = real(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]);
        let mut eigs = eigenvalues(&r).unwrap();
        eigs.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((eigs[0] - Complex64::new(t.cos(), -t.sin())).norm() < 1e-14);
        assert!((eigs[1] - Complex64::new(t.cos(), t.sin())).norm() < 1e-14);

        let j = real(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(spectral_radius(&j).unwrap(), 1.0);
    }

    #[test]
    fn eigenvalues_match_trace_and_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..500 {
            let n = 1 + trial % 7;
            let a = ComplexMatrix::new(DMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }))
            .unwrap();
            let eigs = eigenvalues(&a).unwrap();
            let sum: Complex64 = eigs.iter().sum();
            assert!((sum - a.trace()).norm() < 1e-11 * n as f64, "trace mismatch");
            let r = spectral_radius(&a).unwrap();
            let r3 = spectral_radius(&a.pow(3)).unwrap();
            assert!((r3 - r.powi(3)).abs() <= 1e-9 * (1.0 + r3));
        }
    }

    #[test]
    fn sigma1_examples() {
        assert!((sigma1(&real(&[&[0.0, 2.0], &[0.0, 0.0]])).unwrap() - 2.0).abs() < 1e-14);
        assert!((sigma1(&real(&[&[3.0, 0.0], &[0.0, -5.0]])).unwrap() - 5.0).abs() < 1e-14);
        let t = 0.3f64;
        let u = real(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]);
        assert!((sigma1(&u).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dominant_eigenvector_is_deterministic() {
        let a = real(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let (lambda, v) = dominant_eigenpair(&a).unwrap();
        assert!((lambda - c(3.0)).norm() < 1e-12);
        let s = 1.0 / 2f64.sqrt();
        assert!((v[0] - c(s)).norm() < 1e-12 && (v[1] - c(s)).norm() < 1e-12);
        let (_, v2) = dominant_eigenpair(&a.scale(Complex64::new(0.0, 1.0))).unwrap();
        assert!(v2[0].im.abs() < 1e-14 && v2[0].re > 0.0);
    }
}
