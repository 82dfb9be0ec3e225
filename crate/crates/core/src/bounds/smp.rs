use nalgebra::DVector;
use num_complex::Complex64;

use super::csr::{csr_refine, family_norm};
use super::{ScaledFamily, DEFAULT_BUDGET};
use crate::error::{JsrError, Result};
use crate::family::{evaluate_word, necklaces, prefix_cost, MatrixFamily, PrefixProducts, Word};
use crate::linalg::{dominant_eigenpair, normalize_phase, spectral_radius, EllipsoidalShape};

/// Relative distance to the best lower bound within which a necklace counts
/// as a spectrum-maximizing candidate.
pub const SMP_RELATIVE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SmpCandidate {
    pub word: Word,
    pub value: f64,
    /// The word is not a power of a shorter word.
    pub minimal: bool,
    pub certified: bool,
    pub certificate: Option<EllipsoidalShape>,
}

/// Necklaces up to length `k_max` whose normalized spectral radius is within
/// [`SMP_RELATIVE_TOL`] of the best one, sorted by length then
/// lexicographically. Lengths that do not fit in `budget` are skipped.
pub fn smp_candidates(family: &MatrixFamily, k_max: usize, budget: u64) -> Result<Vec<SmpCandidate>> {
    let sf = ScaledFamily::new(family);
    let mut scored: Vec<(Word, f64)> = Vec::new();
    let mut spent = 0u64;
    for k in 1..=k_max {
        let words = necklaces(sf.m(), k);
        let cost = prefix_cost(&words);
        if spent.saturating_add(cost) > budget {
            break;
        }
        spent += cost;
        let mut walk = PrefixProducts::new(&sf.members);
        for w in words {
            let rho = spectral_radius(walk.product(w.indices()))?;
            scored.push((w, rho.powf(1.0 / k as f64) * sf.scale));
        }
    }
    let best = scored.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<SmpCandidate> = scored
        .into_iter()
        .filter(|(_, v)| best - v <= SMP_RELATIVE_TOL * best)
        .map(|(word, value)| SmpCandidate {
            minimal: word.is_primitive(),
            word,
            value,
            certified: false,
            certificate: None,
        })
        .collect();
    out.sort_by(|a, b| a.word.len().cmp(&b.word.len()).then_with(|| a.word.cmp(&b.word)));
    Ok(out)
}

/// Unit eigenvector of the candidate product for an eigenvalue of maximal
/// modulus, with the first nonzero component real and positive. Among
/// eigenvalues of equal modulus the one with larger real part, then larger
/// imaginary part, is taken.
pub fn leading_eigenvector(family: &MatrixFamily, candidate: &SmpCandidate) -> Result<DVector<Complex64>> {
    if !(candidate.value > 0.0) {
        return Err(JsrError::Precondition("leading eigenvector needs a candidate with positive value".into()));
    }
    let p = evaluate_word(family, &candidate.word)?;
    let (_, v) = dominant_eigenpair(&p)?;
    Ok(normalize_phase(&v))
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    /// Refinement iterations per starting shape.
    pub iters: usize,
    /// Relative slack allowed above the candidate value.
    pub tol: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { iters: 500, tol: 1e-6 }
    }
}

#[derive(Clone, Debug)]
pub struct CertificationAttempt {
    pub start: String,
    /// `max_i ‖A_i‖_P / value` reached from this start.
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct CertificationReport {
    pub best_ratio: f64,
    pub best_shape: EllipsoidalShape,
    pub attempts: Vec<CertificationAttempt>,
}

#[derive(Clone, Debug)]
pub enum SmpValidation {
    Certified(EllipsoidalShape),
    NotCertified(CertificationReport),
}

impl SmpValidation {
    pub fn is_certified(&self) -> bool {
        matches!(self, SmpValidation::Certified(_))
    }
}

/// Starting shapes for the search: the Euclidean norm, and the diagonal
/// shape balancing the row and column scales of the family.
fn starting_shapes(family: &MatrixFamily) -> Vec<(String, EllipsoidalShape)> {
    let n = family.dim();
    let mut starts = vec![("identity".to_string(), EllipsoidalShape::identity(n))];
    let weights: Vec<f64> = (0..n)
        .map(|i| {
            let col: f64 = family.members().iter().map(|a| (0..n).map(|r| a.get(r, i).norm_sqr()).sum::<f64>()).sum();
            let row: f64 = family.members().iter().map(|a| (0..n).map(|c| a.get(i, c).norm_sqr()).sum::<f64>()).sum();
            if col > 0.0 && row > 0.0 {
                (col / row).sqrt()
            } else {
                1.0
            }
        })
        .collect();
    if weights.iter().any(|w| (w - 1.0).abs() > 1e-12) {
        if let Ok(d) = crate::linalg::ComplexMatrix::real_diagonal(&weights) {
            if let Ok(shape) = EllipsoidalShape::new(d) {
                starts.push(("balanced-diagonal".to_string(), shape));
            }
        }
    }
    starts
}

/// Searches for an ellipsoidal norm in which every member has norm at most
/// `value·(1 + tol)`. Such a norm proves ρ(F) ≤ value, and with the
/// candidate's own value as lower bound, pins ρ(F).
pub fn validate_smp(family: &MatrixFamily, candidate: &SmpCandidate, opts: &CertifyOptions) -> Result<SmpValidation> {
    if !(candidate.value > 0.0) {
        return Err(JsrError::Precondition("certification needs a candidate with positive value".into()));
    }
    let threshold = candidate.value * (1.0 + opts.tol);
    let mut attempts = Vec::new();
    let mut best: Option<(f64, EllipsoidalShape)> = None;
    for (name, start) in starting_shapes(family) {
        let (v0, _) = family_norm(family, &start)?;
        if v0 <= threshold {
            return Ok(SmpValidation::Certified(start));
        }
        let (shape, v) = csr_refine(family, &start, opts.iters)?;
        attempts.push(CertificationAttempt { start: name, ratio: v / candidate.value });
        if v <= threshold {
            return Ok(SmpValidation::Certified(shape));
        }
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, shape));
        }
    }
    let (v, shape) = best.expect("at least one start");
    Ok(SmpValidation::NotCertified(CertificationReport { best_ratio: v / candidate.value, best_shape: shape, attempts }))
}

/// Candidates annotated with the outcome of [`validate_smp`].
pub fn certified_candidates(
    family: &MatrixFamily,
    k_max: usize,
    opts: &CertifyOptions,
) -> Result<Vec<(SmpCandidate, SmpValidation)>> {
    smp_candidates(family, k_max, DEFAULT_BUDGET)?
        .into_iter()
        .filter(|c| c.value > 0.0)
        .map(|mut c| {
            let v = validate_smp(family, &c, opts)?;
            if let SmpValidation::Certified(shape) = &v {
                c.certified = true;
                c.certificate = Some(shape.clone());
            }
            Ok((c, v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma1, ComplexMatrix};

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    fn family(ms: Vec<ComplexMatrix>) -> MatrixFamily {
        MatrixFamily::new("f", ms).unwrap()
    }

    fn w(v: &[usize]) -> Word {
        Word::new(v.to_vec()).unwrap()
    }

    #[test]
    fn blondel_candidates() {
        let f = family(vec![real(&[&[1.0, 1.0], &[0.0, 1.0]]), real(&[&[1.0, 0.0], &[1.0, 1.0]])]);
        let cands = smp_candidates(&f, 4, DEFAULT_BUDGET).unwrap();
        let words: Vec<&Word> = cands.iter().map(|c| &c.word).collect();
        assert_eq!(words, vec![&w(&[0, 1]), &w(&[0, 1, 0, 1])]);
        assert!(cands[0].minimal);
        assert!(!cands[1].minimal);
        for c in &cands {
            let p = evaluate_word(&f, &c.word).unwrap();
            let direct = spectral_radius(&p).unwrap().powf(1.0 / c.word.len() as f64);
            assert!((direct - c.value).abs() <= 1e-10);
        }
    }

    #[test]
    fn single_and_sign_flip_candidates() {
        let a = real(&[&[0.3, 0.9], &[-0.4, 0.2]]);
        let cands = smp_candidates(&family(vec![a]), 5, DEFAULT_BUDGET).unwrap();
        assert_eq!(cands[0].word, w(&[0]));
        assert!(cands[0].minimal);
        assert!(cands.iter().skip(1).all(|c| !c.minimal));

        let a = real(&[&[2.0, 1.0], &[-1.0, 0.0]]);
        let b = real(&[&[2.0, -1.0], &[1.0, 0.0]]);
        let cands = smp_candidates(&family(vec![a, b]), 4, DEFAULT_BUDGET).unwrap();
        assert_eq!(cands[0].word, w(&[0, 1]));
        assert!((cands[0].value - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn leading_eigenvectors() {
        let a = real(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let f = family(vec![a]);
        let c = &smp_candidates(&f, 1, DEFAULT_BUDGET).unwrap()[0];
        let v = leading_eigenvector(&f, c).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((v[0].re - s).abs() < 1e-12 && (v[1].re - s).abs() < 1e-12);

        let rot = family(vec![real(&[&[0.0, -1.0], &[1.0, 0.0]])]);
        let c = &smp_candidates(&rot, 1, DEFAULT_BUDGET).unwrap()[0];
        let v1 = leading_eigenvector(&rot, c).unwrap();
        let v2 = leading_eigenvector(&rot, c).unwrap();
        assert_eq!(v1, v2);
        assert!((v1.norm() - 1.0).abs() < 1e-12);
        assert!(v1[0].im == 0.0 && v1[0].re > 0.0);

        let zero = SmpCandidate { word: w(&[0]), value: 0.0, minimal: true, certified: false, certificate: None };
        assert!(matches!(leading_eigenvector(&rot, &zero), Err(JsrError::Precondition(_))));
    }

    #[test]
    fn conjugate_pair_candidate_uses_top_singular_vector() {
        let a = real(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let f = family(vec![a.clone(), a.adjoint()]);
        let c = smp_candidates(&f, 2, DEFAULT_BUDGET).unwrap().into_iter().find(|c| c.word == w(&[0, 1])).unwrap();
        assert!((c.value - sigma1(&a).unwrap()).abs() < 1e-10);
        let v = leading_eigenvector(&f, &c).unwrap();
        // eigenvector of A·A*, i.e. a top left singular vector of A
        let aat = a.mul(&a.adjoint());
        let img = aat.mul_vec(&v);
        let lambda = img.dot(&v.conjugate());
        assert!((&img - &v * lambda).norm() < 1e-10);
        assert!((lambda.re - c.value * c.value).abs() < 1e-9);
    }

    #[test]
    fn certification_examples() {
        let a = real(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let f = family(vec![a.clone(), a.adjoint()]);
        let c = smp_candidates(&f, 2, DEFAULT_BUDGET).unwrap().remove(0);
        assert!((c.value - 2.0).abs() < 1e-12);
        match validate_smp(&f, &c, &CertifyOptions::default()).unwrap() {
            SmpValidation::Certified(shape) => assert_eq!(shape.p(), &ComplexMatrix::identity(2)),
            other => panic!("{other:?}"),
        }

        let normal = family(vec![real(&[&[1.0, -2.0], &[2.0, 1.0]])]);
        let c = smp_candidates(&normal, 1, DEFAULT_BUDGET).unwrap().remove(0);
        assert!(validate_smp(&normal, &c, &CertifyOptions::default()).unwrap().is_certified());
    }

    #[test]
    fn berger_wang_ratio_is_reported() {
        let t = std::f64::consts::PI / 6.0;
        let alpha: f64 = 1.1;
        let f = family(vec![
            real(&[&[0.0, 0.0], &[alpha.powi(3), 0.0]]),
            real(&[&[t.cos(), t.sin()], &[-t.sin(), t.cos()]]).scale_real(1.0 / alpha),
        ]);
        let cands = smp_candidates(&f, 6, DEFAULT_BUDGET).unwrap();
        let c = cands.iter().find(|c| c.word.len() == 4).expect("length-4 candidate");
        assert!((c.value - 1.0).abs() < 1e-9);
        match validate_smp(&f, c, &CertifyOptions::default()).unwrap() {
            SmpValidation::Certified(_) => {}
            SmpValidation::NotCertified(r) => assert!(r.best_ratio <= 1.2, "{}", r.best_ratio),
        }
    }
}
