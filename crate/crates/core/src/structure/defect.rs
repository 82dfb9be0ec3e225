use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{JsrError, Result};
use crate::family::{normalized_family, MatrixFamily, Word};
use crate::linalg::{row_sum_norm, ComplexMatrix};

/// Minimal fitted log-log slope reported as growth.
pub const GROWTH_SLOPE_THRESHOLD: f64 = 0.8;
/// The tail maximum may exceed the median by at most this factor for the
/// sample to count as bounded.
pub const PLATEAU_FACTOR: f64 = 2.0;

#[derive(Clone, Debug)]
pub struct DefectivityOptions {
    /// Longest product length `K`.
    pub horizon: usize,
    /// Random walkers advanced alongside the constant and greedy ones.
    pub samples_per_k: usize,
    pub seed: u64,
}

impl Default for DefectivityOptions {
    fn default() -> Self {
        Self { horizon: 64, samples_per_k: 16, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthSample {
    pub k: usize,
    /// Largest ∞-norm among the sampled products of the normalized family.
    pub max_norm: f64,
    pub word: Word,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum DefectivityClass {
    BoundedEvidence,
    GrowthEvidence { slope: f64 },
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct DefectivityReport {
    pub rho_est: f64,
    pub samples: Vec<GrowthSample>,
    pub classification: DefectivityClass,
    /// Slope of `ln M_k` against `ln k` over the second half of the samples.
    pub fitted_slope: Option<f64>,
    pub growth_slope_threshold: f64,
    pub plateau_factor: f64,
    pub seed: u64,
    /// Sampling stopped early because a product stopped being finite.
    pub overflowed: bool,
}

struct Walker {
    word: Vec<usize>,
    product: ComplexMatrix,
}

impl Walker {
    fn start(members: &[ComplexMatrix], i: usize) -> Self {
        Self { word: vec![i], product: members[i].clone() }
    }

    fn extend(&mut self, members: &[ComplexMatrix], i: usize) {
        self.word.push(i);
        self.product = self.product.mul(&members[i]);
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn classify(samples: &[GrowthSample]) -> (DefectivityClass, Option<f64>) {
    let count = samples.len();
    if count < 4 {
        return (DefectivityClass::Inconclusive, None);
    }
    let tail: Vec<(f64, f64)> = samples[count / 2..]
        .iter()
        .filter(|s| s.max_norm > 0.0)
        .map(|s| ((s.k as f64).ln(), s.max_norm.ln()))
        .collect();
    let slope = least_squares_slope(&tail);
    if slope.is_some_and(|s| s >= GROWTH_SLOPE_THRESHOLD) {
        return (DefectivityClass::GrowthEvidence { slope: slope.unwrap() }, slope);
    }
    let mut all: Vec<f64> = samples.iter().map(|s| s.max_norm).collect();
    all.sort_by(f64::total_cmp);
    let median = if count % 2 == 1 { all[count / 2] } else { 0.5 * (all[count / 2 - 1] + all[count / 2]) };
    let quarter = (count / 4).max(1);
    let tail_max = samples[count - quarter..].iter().map(|s| s.max_norm).fold(0.0, f64::max);
    if tail_max <= PLATEAU_FACTOR * median {
        (DefectivityClass::BoundedEvidence, slope)
    } else {
        (DefectivityClass::Inconclusive, slope)
    }
}

/// Samples `M_k = max ‖P‖_∞` over products `P` of length `k ≤ K` of
/// `F / rho_est`, using one constant walker per member, one greedy walker
/// (extends by the member maximizing the new norm, lowest index on ties),
/// and `samples_per_k` seeded random walkers. A bounded `M_k` is evidence
/// that the normalized family is nondefective; polynomial growth is
/// evidence that it is defective.
pub fn defectivity_probe(family: &MatrixFamily, rho_est: f64, opts: &DefectivityOptions) -> Result<DefectivityReport> {
    if !(rho_est > 0.0) || !rho_est.is_finite() {
        return Err(JsrError::Domain(format!("growth normalization must be positive, got {rho_est}")));
    }
    if opts.horizon == 0 {
        return Err(JsrError::Domain("probe horizon must be positive".into()));
    }
    let scaled = normalized_family(family, rho_est)?;
    let members = scaled.members();
    let m = members.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut walkers: Vec<Walker> = (0..m).map(|i| Walker::start(members, i)).collect();
    let greedy_first = (0..m).fold(0, |best, i| {
        if row_sum_norm(&members[i]) > row_sum_norm(&members[best]) {
            i
        } else {
            best
        }
    });
    walkers.push(Walker::start(members, greedy_first));
    let greedy = m;
    for _ in 0..opts.samples_per_k {
        walkers.push(Walker::start(members, rng.random_range(0..m)));
    }

    let mut samples = Vec::with_capacity(opts.horizon);
    let mut overflowed = false;
    for k in 1..=opts.horizon {
        if k > 1 {
            for i in 0..m {
                walkers[i].extend(members, i);
            }
            let g = &walkers[greedy];
            let next = (0..m)
                .map(|i| (i, row_sum_norm(&g.product.mul(&members[i]))))
                .fold((0, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
                .0;
            walkers[greedy].extend(members, next);
            for w in walkers[greedy + 1..].iter_mut() {
                w.extend(members, rng.random_range(0..m));
            }
        }
        let mut best = (f64::NEG_INFINITY, 0);
        for (idx, w) in walkers.iter().enumerate() {
            let v = row_sum_norm(&w.product);
            if v > best.0 {
                best = (v, idx);
            }
        }
        if !best.0.is_finite() {
            overflowed = true;
            break;
        }
        samples.push(GrowthSample { k, max_norm: best.0, word: Word::new(walkers[best.1].word.clone())? });
    }
    let (classification, fitted_slope) = classify(&samples);
    Ok(DefectivityReport {
        rho_est,
        samples,
        classification,
        fitted_slope,
        growth_slope_threshold: GROWTH_SLOPE_THRESHOLD,
        plateau_factor: PLATEAU_FACTOR,
        seed: opts.seed,
        overflowed,
    })
}
