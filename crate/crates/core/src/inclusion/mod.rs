//! Switched linear systems `x(k+1) = A_{i_k} x(k)` with members drawn from
//! a family: perturbed-system families, trajectory simulation, growth
//! probing and robustness radius search.

mod robust;
mod trajectory;

pub use robust::{robustness_search, AlphaProbe, RobustnessOptions, RobustnessReport};
pub use trajectory::{simulate_trajectory, uas_probe, Policy, Trajectory, UasOptions, UasReport};

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{JsrError, Result};
use crate::family::MatrixFamily;
use crate::linalg::ComplexMatrix;

/// Most vertices (or grid points) a perturbed family may have.
pub const MAX_PERTURBED_MEMBERS: u64 = 1 << 20;

/// Norm bounding the uncertainty vector `δ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaNorm {
    #[default]
    Infinity,
    Two,
}

impl fmt::Display for DeltaNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeltaNorm::Infinity => "inf",
            DeltaNorm::Two => "2",
        })
    }
}

impl FromStr for DeltaNorm {
    type Err = JsrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" => Ok(DeltaNorm::Infinity),
            "2" | "two" | "euclidean" => Ok(DeltaNorm::Two),
            other => Err(JsrError::Domain(format!("unknown uncertainty norm {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    VerticesOnly,
    /// `levels + 1` equally spaced values per coordinate of `[−α, α]`.
    Grid(usize),
}

/// `x(k+1) = (A₀ + Σ_j δ_j(k) A_j) x(k)` with `‖δ(k)‖ ≤ α`.
#[derive(Clone, Debug)]
pub struct PerturbedSystem {
    pub a0: ComplexMatrix,
    pub directions: Vec<ComplexMatrix>,
    pub delta_norm: DeltaNorm,
    pub alpha: f64,
}

impl PerturbedSystem {
    pub fn new(a0: ComplexMatrix, directions: Vec<ComplexMatrix>, delta_norm: DeltaNorm, alpha: f64) -> Result<Self> {
        if let Some(bad) = directions.iter().find(|d| d.dim() != a0.dim()) {
            return Err(JsrError::DimensionMismatch { expected: a0.dim(), got: bad.dim() });
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(JsrError::Domain(format!("uncertainty bound must be nonnegative, got {alpha}")));
        }
        Ok(Self { a0, directions, delta_norm, alpha })
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..self.clone() }
    }

    pub fn p(&self) -> usize {
        self.directions.len()
    }
}

/// Whether the built family represents the whole uncertainty set (up to
/// convex hull) rather than a sample of it. Only the ∞-ball has finitely
/// many extreme points; 2-ball families are sampled lower envelopes.
pub fn sampling_is_exact(delta_norm: DeltaNorm) -> bool {
    delta_norm == DeltaNorm::Infinity
}

fn member(sys: &PerturbedSystem, delta: &[f64]) -> ComplexMatrix {
    delta.iter().zip(&sys.directions).fold(sys.a0.clone(), |acc, (d, a)| acc.add(&a.scale_real(*d)))
}

fn push_unique(members: &mut Vec<ComplexMatrix>, m: ComplexMatrix) {
    if !members.contains(&m) {
        members.push(m);
    }
}

/// Matrix family whose convex hull is (∞-ball) or samples (2-ball) the set
/// `{A₀ + Σ δ_j A_j : ‖δ‖ ≤ α}`. Vertices are listed in sign-pattern order
/// with `+α` first; identical members are merged.
pub fn build_perturbed_family(sys: &PerturbedSystem, sampling: Sampling) -> Result<MatrixFamily> {
    if !(sys.alpha >= 0.0) {
        return Err(JsrError::Domain(format!("uncertainty bound must be nonnegative, got {}", sys.alpha)));
    }
    let p = sys.p();
    let alpha = sys.alpha;
    let mut members = Vec::new();
    match sampling {
        Sampling::VerticesOnly => {
            if sys.delta_norm == DeltaNorm::Two {
                return Err(JsrError::Precondition(
                    "the 2-norm uncertainty ball has no finite vertex set; use grid sampling".into(),
                ));
            }
            let count = 1u64.checked_shl(p as u32).filter(|_| p < 64).unwrap_or(u64::MAX);
            if count > MAX_PERTURBED_MEMBERS {
                return Err(JsrError::BudgetExceeded { budget: MAX_PERTURBED_MEMBERS, needed: count, partial: None });
            }
            for s in 0..count {
                let delta: Vec<f64> = (0..p).map(|j| if s >> j & 1 == 0 { alpha } else { -alpha }).collect();
                push_unique(&mut members, member(sys, &delta));
            }
        }
        Sampling::Grid(levels) => {
            if levels == 0 {
                return Err(JsrError::Domain("grid sampling needs at least one level".into()));
            }
            let per = levels as u64 + 1;
            let count = per.checked_pow(p as u32).unwrap_or(u64::MAX);
            if count > MAX_PERTURBED_MEMBERS {
                return Err(JsrError::BudgetExceeded { budget: MAX_PERTURBED_MEMBERS, needed: count, partial: None });
            }
            let mut idx = vec![0usize; p];
            for _ in 0..count {
                let mut delta: Vec<f64> =
                    idx.iter().map(|&t| alpha - 2.0 * alpha * t as f64 / levels as f64).collect();
                if sys.delta_norm == DeltaNorm::Two {
                    let len = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
                    if len > alpha {
                        delta.iter_mut().for_each(|d| *d *= alpha / len);
                    }
                }
                push_unique(&mut members, member(sys, &delta));
                for slot in idx.iter_mut() {
                    *slot += 1;
                    if *slot <= levels {
                        break;
                    }
                    *slot = 0;
                }
            }
        }
    }
    MatrixFamily::new(format!("perturbed(alpha={alpha})"), members)
}
