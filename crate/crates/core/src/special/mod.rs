//! Exact values of ρ(F) for families with recognizable structure.
//!
//! Detectors run in a fixed order and the first that applies wins:
//! a single member, all row- (or all column-) stochastic members,
//! commuting members, normal members, common upper triangular form, a
//! conjugate pair `{A, A*}`, the two 2×2 sign-flip and swap patterns, a
//! block triangular split whose diagonal blocks are themselves solvable,
//! and finally a necklace of `F` attaining ρ(|F|).

mod patterns;

pub use patterns::{detect_pattern_pairs, PairPattern, PatternKind, PATTERN_TOL};

use std::fmt;

use serde::Serialize;

use crate::bounds::{bracket, smp_candidates, validate_smp, BoundsOptions, CertifyOptions, SmpValidation};
use crate::error::Result;
use crate::family::{abs_family, MatrixFamily, Word};
use crate::linalg::{is_row_stochastic, row_sum_norm, sigma1, spectral_radius, ComplexMatrix, NormKind};
use crate::structure::{apply_block_reduction, coordinate_split, invariant_subspace_search, SubspaceSearchOptions};

/// Default relative tolerance of the algebraic detectors.
pub const DETECTOR_TOL: f64 = 1e-10;
/// Relative agreement required between a necklace of `F` and ρ(|F|).
pub const ABS_MATCH_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ClosedFormRule {
    SingleMatrix,
    AllStochastic,
    Commuting,
    AllNormal,
    AllUpperTriangular,
    ConjugatePair,
    SignFlipPair2x2,
    SwapPair2x2,
    BlockTriangular,
    AbsExact,
}

impl fmt::Display for ClosedFormRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StochasticOrientation {
    Row,
    Column,
}

/// Evidence attached to a closed-form value.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedFormCertificate {
    /// Value is `ρ(A_member)`.
    MemberMaximum { member: usize },
    Stochastic { orientation: StochasticOrientation },
    /// `‖A₁ − A₀*‖_∞` at detection.
    ConjugatePair { defect: f64 },
    Pattern { pattern: PairPattern },
    Block {
        n1: usize,
        residual: f64,
        /// Split found in the given basis rather than by subspace search.
        coordinate: bool,
        upper: Box<ClosedFormResult>,
        lower: Box<ClosedFormResult>,
    },
    AbsWitness { word: Word, abs_value: f64, abs_source: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormResult {
    pub value: f64,
    pub rule: ClosedFormRule,
    pub certificate: ClosedFormCertificate,
}

#[derive(Clone, Debug)]
pub struct ClosedFormOptions {
    pub tol: f64,
    /// Product length used when squeezing ρ(F) against ρ(|F|).
    pub abs_k_max: usize,
    pub abs_budget: u64,
    pub search: SubspaceSearchOptions,
}

impl Default for ClosedFormOptions {
    fn default() -> Self {
        Self { tol: DETECTOR_TOL, abs_k_max: 8, abs_budget: 1_000_000, search: SubspaceSearchOptions::default() }
    }
}

impl ClosedFormOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// `‖A_iA_j − A_jA_i‖_∞ ≤ tol·(1 + ‖A_i‖_∞‖A_j‖_∞)` for every pair.
pub fn detect_commuting(family: &MatrixFamily, tol: f64) -> bool {
    let ms = family.members();
    ms.iter().enumerate().all(|(i, a)| {
        ms[i + 1..].iter().all(|b| {
            let comm = a.mul(b).sub(&b.mul(a));
            row_sum_norm(&comm) <= tol * (1.0 + row_sum_norm(a) * row_sum_norm(b))
        })
    })
}

/// `‖A A* − A* A‖_∞ ≤ tol·(1 + ‖A‖_∞²)` for every member.
pub fn detect_all_normal(family: &MatrixFamily, tol: f64) -> bool {
    family.members().iter().all(|a| {
        let ad = a.adjoint();
        let comm = a.mul(&ad).sub(&ad.mul(a));
        row_sum_norm(&comm) <= tol * (1.0 + row_sum_norm(a).powi(2))
    })
}

fn is_upper_triangular(a: &ComplexMatrix, tol: f64) -> bool {
    let n = a.dim();
    let bound = tol * (1.0 + a.max_abs_entry());
    (0..n).all(|r| (0..r).all(|c| a.get(r, c).norm() <= bound))
}

fn stochastic_orientation(family: &MatrixFamily, tol: f64) -> Option<StochasticOrientation> {
    if family.members().iter().all(|a| is_row_stochastic(a, tol)) {
        Some(StochasticOrientation::Row)
    } else if family.members().iter().all(|a| is_row_stochastic(&a.transpose(), tol)) {
        Some(StochasticOrientation::Column)
    } else {
        None
    }
}

fn member_maximum(family: &MatrixFamily, rule: ClosedFormRule) -> Result<ClosedFormResult> {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, a) in family.members().iter().enumerate() {
        let r = spectral_radius(a)?;
        if r > best.0 {
            best = (r, i);
        }
    }
    Ok(ClosedFormResult { value: best.0, rule, certificate: ClosedFormCertificate::MemberMaximum { member: best.1 } })
}

/// Exact ρ(F) when one of the recognized structures applies.
pub fn try_closed_form(family: &MatrixFamily, opts: &ClosedFormOptions) -> Result<Option<ClosedFormResult>> {
    closed_form(family, opts, true)
}

fn closed_form(family: &MatrixFamily, opts: &ClosedFormOptions, allow_abs: bool) -> Result<Option<ClosedFormResult>> {
    let tol = opts.tol;
    if family.len() == 1 {
        return member_maximum(family, ClosedFormRule::SingleMatrix).map(Some);
    }
    if let Some(orientation) = stochastic_orientation(family, tol) {
        return Ok(Some(ClosedFormResult {
            value: 1.0,
            rule: ClosedFormRule::AllStochastic,
            certificate: ClosedFormCertificate::Stochastic { orientation },
        }));
    }
    if detect_commuting(family, tol) {
        return member_maximum(family, ClosedFormRule::Commuting).map(Some);
    }
    if detect_all_normal(family, tol) {
        return member_maximum(family, ClosedFormRule::AllNormal).map(Some);
    }
    if family.members().iter().all(|a| is_upper_triangular(a, tol)) {
        return member_maximum(family, ClosedFormRule::AllUpperTriangular).map(Some);
    }
    if family.len() == 2 {
        let a = family.member(0);
        let defect = row_sum_norm(&family.member(1).sub(&a.adjoint()));
        if defect <= tol * (1.0 + row_sum_norm(a)) {
            return Ok(Some(ClosedFormResult {
                value: sigma1(a)?,
                rule: ClosedFormRule::ConjugatePair,
                certificate: ClosedFormCertificate::ConjugatePair { defect },
            }));
        }
    }
    if let Some(pattern) = detect_pattern_pairs(family) {
        let rule = match pattern.kind {
            PatternKind::SignFlip => ClosedFormRule::SignFlipPair2x2,
            PatternKind::Swap => ClosedFormRule::SwapPair2x2,
        };
        return Ok(Some(ClosedFormResult {
            value: pattern.value(family)?,
            rule,
            certificate: ClosedFormCertificate::Pattern { pattern },
        }));
    }
    if let Some(result) = block_triangular(family, opts)? {
        return Ok(Some(result));
    }
    if allow_abs {
        if let Some((value, word, abs_value, abs_source)) = abs_squeeze(family, opts)? {
            return Ok(Some(ClosedFormResult {
                value,
                rule: ClosedFormRule::AbsExact,
                certificate: ClosedFormCertificate::AbsWitness { word, abs_value, abs_source },
            }));
        }
    }
    Ok(None)
}

fn block_triangular(family: &MatrixFamily, opts: &ClosedFormOptions) -> Result<Option<ClosedFormResult>> {
    if family.dim() < 2 {
        return Ok(None);
    }
    let (cert, coordinate) = match coordinate_split(family, opts.tol)? {
        Some(c) => (c, true),
        None => match invariant_subspace_search(family, &opts.search)? {
            Some(c) => (c, false),
            None => return Ok(None),
        },
    };
    let (upper_f, lower_f) = apply_block_reduction(family, &cert)?;
    let Some(upper) = closed_form(&upper_f, opts, true)? else { return Ok(None) };
    let Some(lower) = closed_form(&lower_f, opts, true)? else { return Ok(None) };
    Ok(Some(ClosedFormResult {
        value: upper.value.max(lower.value),
        rule: ClosedFormRule::BlockTriangular,
        certificate: ClosedFormCertificate::Block {
            n1: cert.n1(),
            residual: cert.residual,
            coordinate,
            upper: Box::new(upper),
            lower: Box::new(lower),
        },
    }))
}

/// ρ(|F|) by the cheapest available exact route: a closed form of `|F|`, a
/// bracket of `|F|` that has closed, or a certified candidate of `|F|`.
fn abs_family_value(abs: &MatrixFamily, opts: &ClosedFormOptions) -> Result<Option<(f64, String)>> {
    if let Some(r) = closed_form(abs, opts, false)? {
        return Ok(Some((r.value, format!("closed form ({})", r.rule))));
    }
    let bopts = BoundsOptions { k_max: opts.abs_k_max, norms: NormKind::standard(), budget: opts.abs_budget };
    let b = bracket(abs, &bopts)?.bracket;
    if b.best_upper - b.best_lower <= ABS_MATCH_TOL * b.best_upper {
        return Ok(Some((b.best_lower, "closed bracket".to_string())));
    }
    for cand in smp_candidates(abs, opts.abs_k_max, opts.abs_budget)?.into_iter().filter(|c| c.minimal && c.value > 0.0) {
        if let SmpValidation::Certified(_) = validate_smp(abs, &cand, &CertifyOptions::default())? {
            return Ok(Some((cand.value, format!("certified product {}", cand.word))));
        }
    }
    Ok(None)
}

/// Since ρ(F) ≤ ρ(|F|), a necklace of `F` reaching ρ(|F|) pins ρ(F).
fn abs_squeeze(family: &MatrixFamily, opts: &ClosedFormOptions) -> Result<Option<(f64, Word, f64, String)>> {
    let abs = abs_family(family);
    let Some((target, source)) = abs_family_value(&abs, opts)? else { return Ok(None) };
    let bopts = BoundsOptions { k_max: opts.abs_k_max, norms: Vec::new(), budget: opts.abs_budget };
    let b = bracket(family, &bopts)?.bracket;
    if (target - b.best_lower).abs() <= ABS_MATCH_TOL * target.max(f64::MIN_POSITIVE) {
        Ok(Some((b.best_lower, b.lower_witness, target, source)))
    } else {
        Ok(None)
    }
}

/// Convenience wrapper for [`abs_squeeze`] with default options: the exact
/// value and witness word when some necklace of `F` up to `k_max` attains
/// ρ(|F|).
pub fn abs_exactness_check(family: &MatrixFamily, k_max: usize) -> Result<Option<(f64, Word)>> {
    let opts = ClosedFormOptions { abs_k_max: k_max, ..ClosedFormOptions::default() };
    Ok(abs_squeeze(family, &opts)?.map(|(v, w, _, _)| (v, w)))
}
