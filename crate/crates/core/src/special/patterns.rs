use serde::Serialize;

use crate::error::Result;
use crate::family::MatrixFamily;
use crate::linalg::{spectral_radius, ComplexMatrix};

/// Absolute entry tolerance for the structural 2×2 patterns.
pub const PATTERN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    /// `B = [[a, −b], [−c, d]]`.
    SignFlip,
    /// `B = [[d, c], [b, a]]`.
    Swap,
}

/// A recognized pair `{A, B}` with `A = [[a, b], [c, d]]` the first member.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairPattern {
    pub kind: PatternKind,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl PairPattern {
    /// ρ(A) when the pattern's condition holds (`bc ≥ 0` for sign flips,
    /// `|a − d| ≥ |b − c|` for swaps), otherwise `sqrt(ρ(AB))`.
    pub fn value(&self, family: &MatrixFamily) -> Result<f64> {
        let a = family.member(0);
        let single = match self.kind {
            PatternKind::SignFlip => self.b * self.c >= 0.0,
            PatternKind::Swap => (self.a - self.d).abs() >= (self.b - self.c).abs(),
        };
        if single {
            spectral_radius(a)
        } else {
            Ok(spectral_radius(&a.mul(family.member(1)))?.sqrt())
        }
    }
}

fn real_entries(m: &ComplexMatrix) -> Option<[f64; 4]> {
    let e = [m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)];
    e.iter().all(|z| z.im.abs() <= PATTERN_TOL).then(|| e.map(|z| z.re))
}

fn matches(x: [f64; 4], y: [f64; 4]) -> bool {
    x.iter().zip(&y).all(|(p, q)| (p - q).abs() <= PATTERN_TOL)
}

/// Recognizes the sign-flip and swap patterns on a real pair of 2×2
/// matrices. Both patterns are involutions, so the member order does not
/// matter.
pub fn detect_pattern_pairs(family: &MatrixFamily) -> Option<PairPattern> {
    if family.len() != 2 || family.dim() != 2 {
        return None;
    }
    let [a, b, c, d] = real_entries(family.member(0))?;
    let other = real_entries(family.member(1))?;
    if matches(other, [a, -b, -c, d]) {
        return Some(PairPattern { kind: PatternKind::SignFlip, a, b, c, d });
    }
    if matches(other, [d, c, b, a]) {
        return Some(PairPattern { kind: PatternKind::Swap, a, b, c, d });
    }
    None
}
