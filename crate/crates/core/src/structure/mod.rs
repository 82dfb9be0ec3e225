//! Reducibility, defectivity and extremal-norm checks.

mod defect;

pub use defect::{
    defectivity_probe, DefectivityClass, DefectivityOptions, DefectivityReport, GrowthSample, GROWTH_SLOPE_THRESHOLD,
    PLATEAU_FACTOR,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{JsrError, Result};
use crate::family::{conjugate_family, necklaces, MatrixFamily, PrefixProducts};
use crate::linalg::{eigenvalues, eigenvector_for, operator_norm, singular_values_of, ComplexMatrix, EllipsoidalShape, NormKind};

/// Singular values below this fraction of the largest are treated as zero
/// when measuring the dimension of a spanned subspace.
pub const RANK_TOL: f64 = 1e-10;
/// Invariance residual accepted relative to the largest member norm.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// A common invariant subspace of every member.
#[derive(Clone, Debug)]
pub struct ReducibilityCertificate {
    /// `n × n₁` matrix with orthonormal columns spanning the subspace.
    pub basis: DMatrix<Complex64>,
    /// Unitary `M` whose first `n₁` columns are `basis`; `M⁻¹A_iM` is block
    /// upper triangular.
    pub transform: ComplexMatrix,
    /// `max_i ‖(I − ΠΠ*)A_iΠ‖₂`.
    pub residual: f64,
    /// Seeds examined before this subspace was found.
    pub seeds_tried: usize,
}

impl ReducibilityCertificate {
    pub fn n1(&self) -> usize {
        self.basis.ncols()
    }
}

#[derive(Clone, Debug)]
pub struct SubspaceSearchOptions {
    pub seed_count: usize,
    /// Longest product whose eigenvectors are used as seeds.
    pub k_seed: usize,
}

impl Default for SubspaceSearchOptions {
    fn default() -> Self {
        Self { seed_count: 64, k_seed: 4 }
    }
}

fn max_member_norm(family: &MatrixFamily) -> Result<f64> {
    family.members().iter().map(|a| operator_norm(a, &NormKind::Spectral)).try_fold(0.0, |acc, v| Ok(f64::max(acc, v?)))
}

/// Orthonormal basis of the column span, with numerical rank decided by
/// [`RANK_TOL`].
fn orthonormal_span(cols: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = cols.nrows();
    if cols.ncols() == 0 {
        return Ok(DMatrix::zeros(n, 0));
    }
    let svd = nalgebra::SVD::try_new(cols.clone(), true, false, f64::EPSILON, 2000)
        .ok_or_else(|| JsrError::ComputationFailure("SVD did not converge".into()))?;
    let u = svd.u.as_ref().expect("left vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let top = order.first().map(|&i| svd.singular_values[i]).unwrap_or(0.0);
    if top == 0.0 {
        return Ok(DMatrix::zeros(n, 0));
    }
    let keep: Vec<usize> = order.into_iter().filter(|&i| svd.singular_values[i] > RANK_TOL * top).collect();
    Ok(DMatrix::from_fn(n, keep.len(), |r, c| u[(r, keep[c])]))
}

/// Smallest subspace containing `seed` and invariant under every member.
fn orbit_closure(members: &[ComplexMatrix], seed: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = seed.nrows();
    let mut q = orthonormal_span(seed)?;
    loop {
        let dim = q.ncols();
        if dim == 0 || dim == n {
            return Ok(q);
        }
        let mut cols = q.clone();
        for a in members {
            let img = a.as_matrix() * &q;
            let start = cols.ncols();
            cols = cols.insert_columns(start, dim, Complex64::new(0.0, 0.0));
            cols.view_mut((0, start), (n, dim)).copy_from(&img);
        }
        let next = orthonormal_span(&cols)?;
        if next.ncols() == dim {
            return Ok(q);
        }
        q = next;
    }
}

fn complement(basis: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = basis.nrows();
    let proj = DMatrix::<Complex64>::identity(n, n) - basis * basis.adjoint();
    orthonormal_span(&proj)
}

/// `max_i ‖(I − ΠΠ*)A_iΠ‖₂`.
pub fn invariance_residual(family: &MatrixFamily, basis: &DMatrix<Complex64>) -> Result<f64> {
    let n = family.dim();
    let proj = DMatrix::<Complex64>::identity(n, n) - basis * basis.adjoint();
    let mut worst: f64 = 0.0;
    for a in family.members() {
        let r = &proj * a.as_matrix() * basis;
        if let Some(&s) = singular_values_of(&r)?.first() {
            worst = worst.max(s);
        }
    }
    Ok(worst)
}

fn certificate_from_basis(
    family: &MatrixFamily,
    basis: DMatrix<Complex64>,
    seeds_tried: usize,
) -> Result<Option<ReducibilityCertificate>> {
    let n = family.dim();
    let n1 = basis.ncols();
    if n1 == 0 || n1 >= n {
        return Ok(None);
    }
    let residual = invariance_residual(family, &basis)?;
    if residual > RESIDUAL_TOL * max_member_norm(family)? {
        return Ok(None);
    }
    let rest = complement(&basis)?;
    if rest.ncols() != n - n1 {
        return Ok(None);
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    m.view_mut((0, 0), (n, n1)).copy_from(&basis);
    m.view_mut((0, n1), (n, n - n1)).copy_from(&rest);
    Ok(Some(ReducibilityCertificate { basis, transform: ComplexMatrix::new(m)?, residual, seeds_tried }))
}

/// Block upper triangular structure already present in the given basis:
/// the smallest `n₁` for which every member vanishes below the diagonal
/// block, within `tol` relative to the largest entry.
pub fn coordinate_split(family: &MatrixFamily, tol: f64) -> Result<Option<ReducibilityCertificate>> {
    let n = family.dim();
    let scale = family.members().iter().map(ComplexMatrix::max_abs_entry).fold(0.0, f64::max);
    for n1 in 1..n {
        let zero_block = family
            .members()
            .iter()
            .all(|a| (n1..n).all(|r| (0..n1).all(|c| a.get(r, c).norm() <= tol * scale)));
        if zero_block {
            let basis = DMatrix::<Complex64>::identity(n, n).columns(0, n1).into_owned();
            return certificate_from_basis(family, basis, 0);
        }
    }
    Ok(None)
}

fn seed_vectors(family: &MatrixFamily, opts: &SubspaceSearchOptions) -> Result<Vec<DMatrix<Complex64>>> {
    let mut seeds = Vec::new();
    'outer: for k in 1..=opts.k_seed {
        let mut walk = PrefixProducts::new(family.members());
        for w in necklaces(family.len(), k) {
            let p = walk.product(w.indices()).clone();
            let mut eigs = eigenvalues(&p)?;
            eigs.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)).then(b.im.total_cmp(&a.im)));
            eigs.dedup_by(|a, b| (*a - *b).norm() <= 1e-9 * (1.0 + b.norm()));
            for lambda in eigs {
                if seeds.len() >= opts.seed_count {
                    break 'outer;
                }
                let v = eigenvector_for(&p, lambda)?;
                seeds.push(DMatrix::from_column_slice(v.len(), 1, v.as_slice()));
            }
        }
    }
    Ok(seeds)
}

/// Looks for a proper subspace invariant under every member, seeding orbit
/// closures with eigenvectors of short products of the family and of its
/// adjoint family (whose invariant subspaces have invariant orthogonal
/// complements). `None` is evidence of irreducibility, not a proof.
pub fn invariant_subspace_search(
    family: &MatrixFamily,
    opts: &SubspaceSearchOptions,
) -> Result<Option<ReducibilityCertificate>> {
    if opts.seed_count == 0 || opts.k_seed == 0 {
        return Err(JsrError::Domain("seed count and seed length must be positive".into()));
    }
    let n = family.dim();
    if n < 2 {
        return Ok(None);
    }
    let adjoint = conjugate_family(family);
    let mut tried = 0;
    for (source, dual) in [(family, false), (&adjoint, true)] {
        for seed in seed_vectors(source, opts)? {
            tried += 1;
            let closure = orbit_closure(source.members(), &seed)?;
            if closure.ncols() == 0 || closure.ncols() == n {
                continue;
            }
            let basis = if dual { complement(&closure)? } else { closure };
            if let Some(cert) = certificate_from_basis(family, basis, tried)? {
                return Ok(Some(cert));
            }
        }
    }
    Ok(None)
}

/// Diagonal-block families of `M⁻¹A_iM`, after re-checking the
/// certificate against `family`.
pub fn apply_block_reduction(
    family: &MatrixFamily,
    cert: &ReducibilityCertificate,
) -> Result<(MatrixFamily, MatrixFamily)> {
    let n = family.dim();
    let n1 = cert.n1();
    if cert.basis.nrows() != n || cert.transform.dim() != n {
        return Err(JsrError::DimensionMismatch { expected: n, got: cert.basis.nrows() });
    }
    if n1 == 0 || n1 >= n {
        return Err(JsrError::Precondition(format!("invariant subspace dimension {n1} is not proper for n = {n}")));
    }
    let residual = invariance_residual(family, &cert.basis)?;
    let threshold = RESIDUAL_TOL * max_member_norm(family)?;
    if residual > threshold {
        return Err(JsrError::StaleCertificate { residual, threshold });
    }
    let m = &cert.transform;
    let m_inv = m.inverse()?;
    let mut upper = Vec::with_capacity(family.len());
    let mut lower = Vec::with_capacity(family.len());
    for a in family.members() {
        let b = m_inv.mul(a).mul(m);
        upper.push(ComplexMatrix::new(b.block(0, 0, n1, n1))?);
        lower.push(ComplexMatrix::new(b.block(n1, n1, n - n1, n - n1))?);
    }
    let labels = family.labels().to_vec();
    Ok((
        MatrixFamily::with_labels(format!("{}/upper", family.name()), upper, labels.clone())?,
        MatrixFamily::with_labels(format!("{}/lower", family.name()), lower, labels)?,
    ))
}

/// True iff `max_i ‖A_i‖_P ≤ value·(1 + tol)`.
pub fn extremal_norm_check(family: &MatrixFamily, shape: &EllipsoidalShape, value: f64, tol: f64) -> Result<bool> {
    if !(value > 0.0) {
        return Err(JsrError::Domain(format!("extremal value must be positive, got {value}")));
    }
    let kind = NormKind::Ellipsoidal(shape.clone());
    for a in family.members() {
        if operator_norm(a, &kind)? > value * (1.0 + tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{block_upper_assemble, BlockCoupler};
    use crate::linalg::sigma1;

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    fn rotation(t: f64) -> ComplexMatrix {
        real(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]])
    }

    fn family(ms: Vec<ComplexMatrix>) -> MatrixFamily {
        MatrixFamily::new("f", ms).unwrap()
    }

    #[test]
    fn triangular_pair_reduces_to_first_axis() {
        let f = family(vec![real(&[&[1.0, 1.0], &[0.0, 2.0]]), real(&[&[3.0, 1.0], &[0.0, 1.0]])]);
        let cert = invariant_subspace_search(&f, &SubspaceSearchOptions::default()).unwrap().expect("reducible");
        assert_eq!(cert.n1(), 1);
        assert!(cert.basis[(1, 0)].norm() < 1e-10);
        assert!(cert.residual <= 1e-8 * 3.2);
        let (up, low) = apply_block_reduction(&f, &cert).unwrap();
        let up_vals: Vec<f64> = up.members().iter().map(|a| a.get(0, 0).norm()).collect();
        let low_vals: Vec<f64> = low.members().iter().map(|a| a.get(0, 0).norm()).collect();
        assert!((up_vals[0] - 1.0).abs() < 1e-8 && (up_vals[1] - 3.0).abs() < 1e-8);
        assert!((low_vals[0] - 2.0).abs() < 1e-8 && (low_vals[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn commuting_rotations_share_complex_eigenvectors() {
        let t = std::f64::consts::PI;
        let f = family(vec![rotation(t / 6.0), rotation(t / 3.0)]);
        let cert = invariant_subspace_search(&f, &SubspaceSearchOptions::default()).unwrap().expect("reducible over C");
        assert_eq!(cert.n1(), 1);
        let v0 = cert.basis[(0, 0)];
        let v1 = cert.basis[(1, 0)];
        assert!((v0.norm() - v1.norm()).abs() < 1e-8);
        assert!((v1 / v0 - Complex64::i()).norm() < 1e-8 || (v1 / v0 + Complex64::i()).norm() < 1e-8);
    }

    #[test]
    fn berger_wang_is_not_reduced() {
        let t = std::f64::consts::PI / 6.0;
        let alpha: f64 = 1.1;
        let f = family(vec![real(&[&[0.0, 0.0], &[alpha.powi(3), 0.0]]), rotation(-t).scale_real(1.0 / alpha)]);
        assert!(invariant_subspace_search(&f, &SubspaceSearchOptions::default()).unwrap().is_none());
    }

    #[test]
    fn assembled_blocks_round_trip() {
        let f1 = family(vec![real(&[&[0.2, 1.0], &[-0.7, 0.4]]), real(&[&[0.9, 0.1], &[0.3, -0.5]])]);
        let f2 = family(vec![real(&[&[1.5]]), real(&[&[-0.25]])]);
        let coupler = BlockCoupler {
            row: 0,
            col: 1,
            blocks: vec![DMatrix::from_element(2, 1, Complex64::new(0.6, 0.0)); 2],
        };
        let big = block_upper_assemble(&[f1.clone(), f2.clone()], &[coupler]).unwrap();
        let cert = coordinate_split(&big, 1e-12).unwrap().expect("given-basis split");
        assert_eq!(cert.n1(), 2);
        let (up, low) = apply_block_reduction(&big, &cert).unwrap();
        for i in 0..2 {
            assert!(up.member(i).max_abs_diff(f1.member(i)) < 1e-8);
            assert!(low.member(i).max_abs_diff(f2.member(i)) < 1e-8);
        }
    }

    #[test]
    fn improper_or_stale_certificates_are_refused() {
        let f = family(vec![real(&[&[1.0, 1.0], &[0.0, 2.0]]), real(&[&[3.0, 1.0], &[0.0, 1.0]])]);
        let mut cert = invariant_subspace_search(&f, &SubspaceSearchOptions::default()).unwrap().unwrap();
        let other = family(vec![real(&[&[1.0, 1.0], &[1.0, 2.0]]), real(&[&[3.0, 1.0], &[0.0, 1.0]])]);
        assert!(matches!(apply_block_reduction(&other, &cert), Err(JsrError::StaleCertificate { .. })));
        cert.basis = DMatrix::identity(2, 2);
        assert!(matches!(apply_block_reduction(&f, &cert), Err(JsrError::Precondition(_))));
    }

    #[test]
    fn extremal_norm_examples() {
        let a = real(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let f = family(vec![a.clone(), a.adjoint()]);
        let s = sigma1(&a).unwrap();
        let id = EllipsoidalShape::identity(2);
        assert!(extremal_norm_check(&f, &id, s, 1e-9).unwrap());
        assert!(!extremal_norm_check(&f, &id, s / 2.0, 1e-9).unwrap());
        let normal = family(vec![real(&[&[1.0, -2.0], &[2.0, 1.0]])]);
        let rho = crate::linalg::spectral_radius(normal.member(0)).unwrap();
        assert!(extremal_norm_check(&normal, &id, rho, 1e-9).unwrap());
    }
}
