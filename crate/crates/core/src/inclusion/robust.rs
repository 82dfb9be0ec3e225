use serde::Serialize;

use super::{build_perturbed_family, sampling_is_exact, DeltaNorm, PerturbedSystem, Sampling};
use crate::bounds::{decide_stability, DecideOptions, StabilityVerdict};
use crate::error::{JsrError, Result};
use crate::linalg::spectral_radius;

#[derive(Clone, Debug)]
pub struct RobustnessOptions {
    pub alpha_hi: f64,
    pub tol_alpha: f64,
    pub per_alpha_budget: u64,
    pub sampling: Sampling,
}

impl Default for RobustnessOptions {
    fn default() -> Self {
        Self { alpha_hi: 1.0, tol_alpha: 0.01, per_alpha_budget: 1_000_000, sampling: Sampling::VerticesOnly }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaProbe {
    pub alpha: f64,
    pub members: usize,
    pub verdict: StabilityVerdict,
}

impl AlphaProbe {
    pub fn is_stable(&self) -> bool {
        matches!(self.verdict, StabilityVerdict::Stable { .. })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RobustnessReport {
    /// Every `α ≤ alpha_star_lo` is certified stable (at the probe itself, and
    /// below it by inclusion of the uncertainty sets).
    pub alpha_star_lo: f64,
    pub alpha_star_hi: f64,
    pub delta_norm: DeltaNorm,
    pub sampling: Sampling,
    /// False for 2-norm balls: the families are samples, so stability claims
    /// only hold for the sampled members.
    pub exact_uncertainty_set: bool,
    pub probes: Vec<AlphaProbe>,
}

fn probe(sys: &PerturbedSystem, alpha: f64, opts: &RobustnessOptions) -> Result<AlphaProbe> {
    let family = build_perturbed_family(&sys.with_alpha(alpha), opts.sampling)?;
    let verdict = decide_stability(&family, &DecideOptions::with_budget(opts.per_alpha_budget))?;
    Ok(AlphaProbe { alpha, members: family.len(), verdict })
}

/// Bisection for the largest uncertainty level `α` keeping the perturbed
/// system stable. Undecided probes count as unstable, so the lower end is
/// always backed by a stability certificate.
pub fn robustness_search(sys: &PerturbedSystem, opts: &RobustnessOptions) -> Result<RobustnessReport> {
    let rho0 = spectral_radius(&sys.a0)?;
    if !(rho0 < 1.0) {
        return Err(JsrError::Precondition(format!("nominal matrix must be stable, its spectral radius is {rho0}")));
    }
    if !(opts.alpha_hi > 0.0) || !(opts.tol_alpha > 0.0) {
        return Err(JsrError::Domain("alpha_hi and tol_alpha must be positive".into()));
    }
    let mut probes = Vec::new();
    let top = probe(sys, opts.alpha_hi, opts)?;
    let top_stable = top.is_stable();
    probes.push(top);
    let (mut lo, mut hi) = (0.0, opts.alpha_hi);
    if top_stable {
        lo = opts.alpha_hi;
    } else {
        let nominal = probe(sys, 0.0, opts)?;
        let nominal_stable = nominal.is_stable();
        probes.push(nominal);
        if !nominal_stable {
            // even the nominal system could not be certified within budget
            hi = 0.0;
        }
        while hi - lo > opts.tol_alpha {
            let mid = 0.5 * (lo + hi);
            let p = probe(sys, mid, opts)?;
            if p.is_stable() {
                lo = mid;
            } else {
                hi = mid;
            }
            probes.push(p);
        }
    }
    Ok(RobustnessReport {
        alpha_star_lo: lo,
        alpha_star_hi: hi,
        delta_norm: sys.delta_norm,
        sampling: opts.sampling,
        exact_uncertainty_set: sampling_is_exact(sys.delta_norm),
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;

    fn swap_system(direction: ComplexMatrix) -> PerturbedSystem {
        PerturbedSystem::new(ComplexMatrix::real_diagonal(&[0.5, 0.5]).unwrap(), vec![direction], DeltaNorm::Infinity, 0.0)
            .unwrap()
    }

    #[test]
    fn swap_direction_radius_is_one_half() {
        let sys = swap_system(ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap());
        let r = robustness_search(&sys, &RobustnessOptions::default()).unwrap();
        assert!(r.alpha_star_lo <= 0.5 && 0.5 <= r.alpha_star_hi, "{} {}", r.alpha_star_lo, r.alpha_star_hi);
        assert!(r.alpha_star_hi - r.alpha_star_lo <= 0.02);
        for p in &r.probes {
            if p.alpha <= r.alpha_star_lo {
                assert!(p.is_stable(), "alpha {}", p.alpha);
            }
        }
    }

    #[test]
    fn zero_direction_never_destabilizes() {
        let sys = swap_system(ComplexMatrix::zeros(2));
        let r = robustness_search(&sys, &RobustnessOptions { alpha_hi: 3.0, ..Default::default() }).unwrap();
        assert_eq!(r.alpha_star_lo, 3.0);
        assert_eq!(r.alpha_star_hi, 3.0);
    }

    #[test]
    fn small_search_range_collapses_at_top() {
        let sys = swap_system(ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap());
        let r = robustness_search(&sys, &RobustnessOptions { alpha_hi: 0.2, ..Default::default() }).unwrap();
        assert_eq!((r.alpha_star_lo, r.alpha_star_hi), (0.2, 0.2));
        assert!(r.probes[0].is_stable());
    }

    #[test]
    fn unstable_nominal_is_rejected() {
        let sys = PerturbedSystem::new(ComplexMatrix::identity(2), vec![ComplexMatrix::identity(2)], DeltaNorm::Infinity, 0.0)
            .unwrap();
        assert!(matches!(robustness_search(&sys, &RobustnessOptions::default()), Err(JsrError::Precondition(_))));
    }
}
