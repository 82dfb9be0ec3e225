use serde::Serialize;

use super::{serialize_norm, Bracket, BoundsStepper, DEFAULT_BUDGET};
use crate::error::Result;
use crate::family::{MatrixFamily, Word};
use crate::linalg::NormKind;

/// Values within this distance of 1 are treated as the stability boundary.
pub const STABILITY_MARGIN: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DecideOptions {
    pub budget: u64,
    /// Optional cap on the product length; the budget alone bounds the
    /// search when `None`.
    pub k_max: Option<usize>,
    pub norms: Vec<NormKind>,
}

impl Default for DecideOptions {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, k_max: None, norms: NormKind::standard() }
    }
}

impl DecideOptions {
    pub fn with_budget(budget: u64) -> Self {
        Self { budget, ..Self::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum StabilityVerdict {
    /// Some product-length norm bound lies below 1.
    Stable {
        k: usize,
        #[serde(serialize_with = "serialize_norm")]
        norm: NormKind,
        value: f64,
        witness: Word,
    },
    /// Some product has spectral radius at least 1.
    Unstable { k: usize, witness: Word, value: f64 },
    /// Neither test fired. `boundary` is set when the bracket is pinned to
    /// `[1, 1]` within the margin, i.e. ρ(F) = 1 to working precision.
    Undecided { bracket: Bracket, boundary: bool },
}

impl StabilityVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            StabilityVerdict::Stable { .. } => "stable",
            StabilityVerdict::Unstable { .. } => "unstable",
            StabilityVerdict::Undecided { .. } => "undecided",
        }
    }
}

/// Raises the product length until an upper bound falls below `1 − ε` or a
/// lower bound reaches `1 − ε`, or the budget runs out.
///
/// When the lower bound reaches the boundary while the best upper bound is
/// still within `1 + ε`, ρ(F) = 1 up to roundoff and neither verdict can be
/// trusted; the result is `Undecided` with `boundary` set.
pub fn decide_stability(family: &MatrixFamily, opts: &DecideOptions) -> Result<StabilityVerdict> {
    let mut stepper = BoundsStepper::new(family, opts.norms.clone(), opts.budget);
    loop {
        if opts.k_max.is_some_and(|kmax| stepper.bracket.k_max_reached >= kmax) {
            break;
        }
        let Some(rec) = stepper.step()? else { break };
        if let Some(u) = rec.min_upper() {
            if u.value < 1.0 - STABILITY_MARGIN {
                return Ok(StabilityVerdict::Stable {
                    k: rec.k,
                    norm: u.norm.clone(),
                    value: u.value,
                    witness: u.witness.clone(),
                });
            }
        }
        if rec.lower >= 1.0 - STABILITY_MARGIN {
            if stepper.bracket.best_upper <= 1.0 + STABILITY_MARGIN {
                return Ok(StabilityVerdict::Undecided { bracket: stepper.bracket, boundary: true });
            }
            return Ok(StabilityVerdict::Unstable { k: rec.k, witness: rec.lower_witness, value: rec.lower });
        }
    }
    Ok(StabilityVerdict::Undecided { bracket: stepper.bracket, boundary: false })
}
