//! Finite-length spectral radius bounds for a matrix family.
//!
//! At each product length `k` the engine evaluates
//!
//! * the lower bound `max_P ρ(P)^{1/k}` over necklaces (ρ is invariant
//!   under cyclic rotation of the word),
//! * one upper bound `max_P ‖P‖^{1/k}` per requested norm over all words,
//! * the trace diagnostic `max_P |tr P|^{1/k}` over necklaces.
//!
//! Products are formed on the family rescaled by a power of two close to
//! its largest ∞-norm, so long products of fast-growing families stay
//! finite; results are scaled back exactly.

mod csr;
mod decide;
mod smp;

pub use csr::{csr_refine, family_norm, CSR_REJECTION_LIMIT, CSR_STEP};
pub use decide::{decide_stability, DecideOptions, StabilityVerdict, STABILITY_MARGIN};
pub use smp::{
    certified_candidates, leading_eigenvector, smp_candidates, validate_smp, CertificationAttempt, CertificationReport, CertifyOptions,
    SmpCandidate, SmpValidation, SMP_RELATIVE_TOL,
};

use serde::{Serialize, Serializer};

use crate::error::{JsrError, PartialBound, Result};
use crate::family::{all_words_cost, is_canonical_slice, necklaces, prefix_cost, MatrixFamily, PrefixProducts, Word};
use crate::linalg::{operator_norm, row_sum_norm, spectral_radius, ComplexMatrix, NormKind};

/// Default work budget, in matrix multiplications.
pub const DEFAULT_BUDGET: u64 = 10_000_000;
/// Default maximal product length for [`bracket`].
pub const DEFAULT_K_MAX: usize = 12;
/// Relative slack under which a later maximizer does not displace an
/// earlier (lexicographically smaller) witness.
const WITNESS_TIE: f64 = 1e-12;

pub(crate) fn serialize_norm<S: Serializer>(norm: &NormKind, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(norm.label())
}

#[derive(Clone, Debug)]
pub struct BoundsOptions {
    pub k_max: usize,
    pub norms: Vec<NormKind>,
    pub budget: u64,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        Self { k_max: DEFAULT_K_MAX, norms: NormKind::standard(), budget: DEFAULT_BUDGET }
    }
}

/// Upper bound `max_P ‖P‖^{1/k}` for one norm at one length.
#[derive(Clone, Debug, Serialize)]
pub struct UpperBound {
    #[serde(serialize_with = "serialize_norm")]
    pub norm: NormKind,
    pub value: f64,
    pub witness: Word,
}

/// All bounds computed at one product length.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsRecord {
    pub k: usize,
    pub lower: f64,
    pub lower_witness: Word,
    pub upper: Vec<UpperBound>,
    /// Trace diagnostic; never used to tighten a bracket.
    pub msr: f64,
}

impl BoundsRecord {
    pub fn min_upper(&self) -> Option<&UpperBound> {
        self.upper.iter().min_by(|a, b| a.value.total_cmp(&b.value))
    }
}

/// Best bounds over all computed lengths.
#[derive(Clone, Debug, Serialize)]
pub struct Bracket {
    pub best_lower: f64,
    pub lower_witness: Word,
    /// `+∞` when no upper bound has been computed.
    pub best_upper: f64,
    pub upper_k: Option<usize>,
    #[serde(serialize_with = "serialize_opt_norm")]
    pub upper_norm: Option<NormKind>,
    pub upper_witness: Option<Word>,
    pub k_max_reached: usize,
    pub multiplications: u64,
    pub budget_exhausted: bool,
}

fn serialize_opt_norm<S: Serializer>(norm: &Option<NormKind>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match norm {
        Some(n) => s.serialize_some(n.label()),
        None => s.serialize_none(),
    }
}

impl Bracket {
    fn empty() -> Self {
        Self {
            best_lower: 0.0,
            lower_witness: Word::single(0),
            best_upper: f64::INFINITY,
            upper_k: None,
            upper_norm: None,
            upper_witness: None,
            k_max_reached: 0,
            multiplications: 0,
            budget_exhausted: false,
        }
    }

    fn absorb(&mut self, rec: &BoundsRecord) {
        if self.k_max_reached == 0 || rec.lower > self.best_lower {
            self.best_lower = rec.lower;
            self.lower_witness = rec.lower_witness.clone();
        }
        if let Some(u) = rec.min_upper() {
            if u.value < self.best_upper {
                self.best_upper = u.value;
                self.upper_k = Some(rec.k);
                self.upper_norm = Some(u.norm.clone());
                self.upper_witness = Some(u.witness.clone());
            }
        }
        self.k_max_reached = rec.k;
    }

    pub fn width(&self) -> f64 {
        self.best_upper - self.best_lower
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketReport {
    pub bracket: Bracket,
    pub records: Vec<BoundsRecord>,
}

#[derive(Clone, Debug)]
struct Best {
    value: f64,
    witness: Option<Vec<usize>>,
}

impl Best {
    fn new() -> Self {
        Self { value: f64::NEG_INFINITY, witness: None }
    }

    fn offer(&mut self, value: f64, word: &[usize]) {
        if value > self.value {
            if self.witness.is_none() || value > self.value + WITNESS_TIE * self.value.abs() {
                self.witness = Some(word.to_vec());
            }
            self.value = value;
        }
    }

    fn word(&self) -> Word {
        Word::new(self.witness.clone().expect("at least one word scanned")).expect("non-empty")
    }
}

/// Family rescaled by a power of two, `F = ŝ·F̃`.
pub(crate) struct ScaledFamily {
    members: Vec<ComplexMatrix>,
    scale: f64,
}

impl ScaledFamily {
    pub(crate) fn new(family: &MatrixFamily) -> Self {
        let top = family.members().iter().map(row_sum_norm).fold(0.0, f64::max);
        if top == 0.0 || !top.is_finite() {
            return Self { members: family.members().to_vec(), scale: 1.0 };
        }
        let scale = 2f64.powi(top.log2().round() as i32);
        let members = family.members().iter().map(|a| a.scale_real(1.0 / scale)).collect();
        Self { members, scale }
    }

    fn m(&self) -> usize {
        self.members.len()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum WordSet {
    Necklaces,
    All,
}

struct LevelScan {
    lower: Best,
    msr: Best,
    upper: Vec<Best>,
    multiplications: u64,
    complete: bool,
    words: u64,
}

/// Scans one length. Stops early (with `complete == false`) when the next
/// word would push the multiplication count past `budget`.
fn scan_level(
    sf: &ScaledFamily,
    k: usize,
    set: WordSet,
    norms: &[NormKind],
    budget: u64,
) -> Result<LevelScan> {
    let mut walk = PrefixProducts::new(&sf.members);
    let mut scan = LevelScan {
        lower: Best::new(),
        msr: Best::new(),
        upper: vec![Best::new(); norms.len()],
        multiplications: 0,
        complete: true,
        words: 0,
    };
    let inv_k = 1.0 / k as f64;
    let scale = sf.scale;
    let visit = |word: &[usize], walk: &mut PrefixProducts, scan: &mut LevelScan| -> Result<bool> {
        let before = walk.multiplications();
        walk.product(word);
        if walk.multiplications() > budget {
            scan.complete = false;
            scan.multiplications = before;
            return Ok(false);
        }
        // the prefix is already in place, so this is a lookup
        let p = walk.product(word);
        if set == WordSet::Necklaces || is_canonical_slice(word) {
            let rho = spectral_radius(p)?;
            scan.lower.offer(rho.powf(inv_k) * scale, word);
            scan.msr.offer(p.trace().norm().powf(inv_k) * scale, word);
        }
        for (b, norm) in scan.upper.iter_mut().zip(norms) {
            b.offer(operator_norm(p, norm)?.powf(inv_k) * scale, word);
        }
        scan.words += 1;
        Ok(true)
    };
    match set {
        WordSet::Necklaces => {
            for w in necklaces(sf.m(), k) {
                if !visit(w.indices(), &mut walk, &mut scan)? {
                    return Ok(scan);
                }
            }
        }
        WordSet::All => {
            let m = sf.m();
            let mut a = vec![0usize; k];
            loop {
                if !visit(&a, &mut walk, &mut scan)? {
                    return Ok(scan);
                }
                let Some(i) = (0..k).rev().find(|&i| a[i] != m - 1) else {
                    break;
                };
                a[i] += 1;
                a[i + 1..].iter_mut().for_each(|x| *x = 0);
            }
        }
    }
    scan.multiplications = walk.multiplications();
    Ok(scan)
}

fn require_positive_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(JsrError::Domain("product length k must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn budget_error(scan: &LevelScan, best: &Best, budget: u64, needed: u64) -> JsrError {
    JsrError::BudgetExceeded {
        budget,
        needed,
        partial: Some(Box::new(PartialBound {
            value: best.value,
            witness: best.witness.clone().and_then(|w| Word::new(w).ok()),
            words_evaluated: scan.words,
        })),
    }
}

/// Lower bound at length `k`: `max ρ(P)^{1/k}` over necklaces, with the
/// lexicographically least maximizing necklace.
pub fn lower_bound_k(family: &MatrixFamily, k: usize, budget: u64) -> Result<(f64, Word)> {
    require_positive_k(k)?;
    let sf = ScaledFamily::new(family);
    let scan = scan_level(&sf, k, WordSet::Necklaces, &[], budget)?;
    if !scan.complete {
        let needed = prefix_cost(&necklaces(sf.m(), k));
        return Err(budget_error(&scan, &scan.lower, budget, needed));
    }
    Ok((scan.lower.value, scan.lower.word()))
}

/// Upper bound at length `k` in one norm: `max ‖P‖^{1/k}` over all words.
pub fn upper_bound_k(family: &MatrixFamily, k: usize, norm: &NormKind, budget: u64) -> Result<(f64, Word)> {
    require_positive_k(k)?;
    let sf = ScaledFamily::new(family);
    let scan = scan_level(&sf, k, WordSet::All, std::slice::from_ref(norm), budget)?;
    if !scan.complete {
        return Err(budget_error(&scan, &scan.upper[0], budget, all_words_cost(sf.m(), k)));
    }
    Ok((scan.upper[0].value, scan.upper[0].word()))
}

/// Trace diagnostic `max |tr P|^{1/k}` over necklaces.
pub fn msr_estimate_k(family: &MatrixFamily, k: usize, budget: u64) -> Result<f64> {
    require_positive_k(k)?;
    let sf = ScaledFamily::new(family);
    let scan = scan_level(&sf, k, WordSet::Necklaces, &[], budget)?;
    if !scan.complete {
        let needed = prefix_cost(&necklaces(sf.m(), k));
        return Err(budget_error(&scan, &scan.msr, budget, needed));
    }
    Ok(scan.msr.value)
}

/// Level-by-level bound computation shared by [`bracket`] and
/// [`decide_stability`].
pub(crate) struct BoundsStepper {
    sf: ScaledFamily,
    norms: Vec<NormKind>,
    budget: u64,
    pub(crate) bracket: Bracket,
}

impl BoundsStepper {
    pub(crate) fn new(family: &MatrixFamily, norms: Vec<NormKind>, budget: u64) -> Self {
        Self { sf: ScaledFamily::new(family), norms, budget, bracket: Bracket::empty() }
    }

    /// Computes the next length, or returns `None` (and flags the bracket)
    /// if the level does not fit in the remaining budget.
    pub(crate) fn step(&mut self) -> Result<Option<BoundsRecord>> {
        let k = self.bracket.k_max_reached + 1;
        let set = if self.norms.is_empty() { WordSet::Necklaces } else { WordSet::All };
        let cost = match set {
            WordSet::All => all_words_cost(self.sf.m(), k),
            WordSet::Necklaces => prefix_cost(&necklaces(self.sf.m(), k)),
        };
        let remaining = self.budget.saturating_sub(self.bracket.multiplications);
        if cost > remaining {
            self.bracket.budget_exhausted = true;
            return Ok(None);
        }
        let scan = scan_level(&self.sf, k, set, &self.norms, remaining)?;
        debug_assert!(scan.complete);
        let record = BoundsRecord {
            k,
            lower: scan.lower.value,
            lower_witness: scan.lower.word(),
            upper: scan
                .upper
                .iter()
                .zip(&self.norms)
                .map(|(b, norm)| UpperBound { norm: norm.clone(), value: b.value, witness: b.word() })
                .collect(),
            msr: scan.msr.value,
        };
        self.bracket.multiplications += scan.multiplications;
        self.bracket.absorb(&record);
        Ok(Some(record))
    }
}

/// Brackets ρ(F) between the best lower and upper bounds over lengths
/// `1..=k_max`.
pub fn bracket(family: &MatrixFamily, opts: &BoundsOptions) -> Result<BracketReport> {
    if opts.k_max == 0 {
        return Err(JsrError::Domain("k_max must be at least 1".into()));
    }
    let mut stepper = BoundsStepper::new(family, opts.norms.clone(), opts.budget);
    let mut records = Vec::with_capacity(opts.k_max);
    while stepper.bracket.k_max_reached < opts.k_max {
        match stepper.step()? {
            Some(r) => records.push(r),
            None => break,
        }
    }
    Ok(BracketReport { bracket: stepper.bracket, records })
}
