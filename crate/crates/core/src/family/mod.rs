//! Finite matrix families, words over them, and the family transforms that
//! act predictably on the joint spectral radius.

mod product;
mod word;

pub use product::{all_words_cost, evaluate_word, prefix_cost, PrefixProducts, ProductCache};
pub use word::{all_words, necklaces, word_count, Word};

pub(crate) use word::is_canonical_slice;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{JsrError, Result};
use crate::linalg::{sigma1, singular_values_of, ComplexMatrix, ZERO};

/// Condition number above which a similarity transform is flagged.
pub const SIMILARITY_CONDITION_WARN: f64 = 1e12;

/// Finite, ordered family of same-size square matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFamily {
    name: String,
    members: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

impl MatrixFamily {
    /// Family with default labels `A0, A1, …`.
    pub fn new(name: impl Into<String>, members: Vec<ComplexMatrix>) -> Result<Self> {
        let labels = (0..members.len()).map(|i| format!("A{i}")).collect();
        Self::with_labels(name, members, labels)
    }

    pub fn with_labels(name: impl Into<String>, members: Vec<ComplexMatrix>, labels: Vec<String>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(JsrError::InvalidMatrix("a family needs at least one member".into()));
        };
        let n = first.dim();
        if let Some(bad) = members.iter().find(|a| a.dim() != n) {
            return Err(JsrError::DimensionMismatch { expected: n, got: bad.dim() });
        }
        if labels.len() != members.len() {
            return Err(JsrError::Domain(format!(
                "{} labels given for {} members",
                labels.len(),
                members.len()
            )));
        }
        Ok(Self { name: name.into(), members, labels })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn members(&self) -> &[ComplexMatrix] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &ComplexMatrix {
        &self.members[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of members `m`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Common dimension `n`.
    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn map_members(&self, suffix: &str, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> MatrixFamily {
        MatrixFamily {
            name: format!("{}{suffix}", self.name),
            members: self.members.iter().map(f).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Largest spectral norm among members.
    pub fn max_spectral_norm(&self) -> Result<f64> {
        self.members.iter().map(sigma1).try_fold(0.0, |acc, v| v.map(|v| f64::max(acc, v)))
    }
}

/// `{αA_i}`.
pub fn scale_family(family: &MatrixFamily, alpha: Complex64) -> MatrixFamily {
    family.map_members("", |a| a.scale(alpha))
}

/// `{M A_i M⁻¹}`.
pub fn similarity_transform(family: &MatrixFamily, m: &ComplexMatrix) -> Result<MatrixFamily> {
    if m.dim() != family.dim() {
        return Err(JsrError::DimensionMismatch { expected: family.dim(), got: m.dim() });
    }
    let s = singular_values_of(m.as_matrix())?;
    let smin = *s.last().expect("non-empty");
    if smin == 0.0 || s[0] / smin > 1e16 {
        return Err(JsrError::SingularTransform(format!("transform is numerically singular (σ_min = {smin:e})")));
    }
    let cond = s[0] / smin;
    if cond > SIMILARITY_CONDITION_WARN {
        warn!("similarity transform is ill-conditioned (condition number {cond:e})");
    }
    let m_inv = m.inverse()?;
    Ok(family.map_members("", |a| m.mul(a).mul(&m_inv)))
}

pub fn transpose_family(family: &MatrixFamily) -> MatrixFamily {
    family.map_members("", ComplexMatrix::transpose)
}

/// Member-wise conjugate transpose.
pub fn conjugate_family(family: &MatrixFamily) -> MatrixFamily {
    family.map_members("", ComplexMatrix::adjoint)
}

/// Entry-wise modulus `|F|`.
pub fn abs_family(family: &MatrixFamily) -> MatrixFamily {
    family.map_members("", ComplexMatrix::abs)
}

/// `{A_i / r}`.
pub fn normalized_family(family: &MatrixFamily, r: f64) -> Result<MatrixFamily> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(JsrError::Domain(format!("normalization factor must be positive, got {r}")));
    }
    Ok(family.map_members("", |a| a.scale_real(1.0 / r)))
}

/// Off-diagonal block of every member at block position `(row, col)`, with
/// `row < col`. One matrix per family member, each of shape
/// `n_row × n_col`.
#[derive(Clone, Debug)]
pub struct BlockCoupler {
    pub row: usize,
    pub col: usize,
    pub blocks: Vec<DMatrix<Complex64>>,
}

/// Assembles block upper triangular members from index-aligned diagonal
/// families; blocks not named by a coupler are zero.
pub fn block_upper_assemble(diagonal: &[MatrixFamily], couplers: &[BlockCoupler]) -> Result<MatrixFamily> {
    let Some(first) = diagonal.first() else {
        return Err(JsrError::Domain("no diagonal families given".into()));
    };
    let m = first.len();
    if let Some(bad) = diagonal.iter().find(|f| f.len() != m) {
        return Err(JsrError::Domain(format!(
            "diagonal families must have the same number of members ({} vs {m})",
            bad.len()
        )));
    }
    let sizes: Vec<usize> = diagonal.iter().map(MatrixFamily::dim).collect();
    let offsets: Vec<usize> = sizes.iter().scan(0, |acc, &s| {
        let o = *acc;
        *acc += s;
        Some(o)
    }).collect();
    let n: usize = sizes.iter().sum();
    for cp in couplers {
        if cp.row >= cp.col || cp.col >= diagonal.len() {
            return Err(JsrError::Domain(format!(
                "coupler position ({}, {}) is not strictly above the block diagonal",
                cp.row, cp.col
            )));
        }
        if cp.blocks.len() != m {
            return Err(JsrError::Domain(format!("coupler has {} blocks for {m} members", cp.blocks.len())));
        }
        for b in &cp.blocks {
            if b.nrows() != sizes[cp.row] || b.ncols() != sizes[cp.col] {
                return Err(JsrError::DimensionMismatch { expected: sizes[cp.row] * sizes[cp.col], got: b.len() });
            }
        }
    }
    let members = (0..m)
        .map(|i| {
            let mut big = DMatrix::from_element(n, n, ZERO);
            for (d, fam) in diagonal.iter().enumerate() {
                let o = offsets[d];
                big.view_mut((o, o), (sizes[d], sizes[d])).copy_from(fam.member(i).as_matrix());
            }
            for cp in couplers {
                big.view_mut((offsets[cp.row], offsets[cp.col]), (sizes[cp.row], sizes[cp.col]))
                    .copy_from(&cp.blocks[i]);
            }
            ComplexMatrix::new(big)
        })
        .collect::<Result<Vec<_>>>()?;
    let name = diagonal.iter().map(MatrixFamily::name).collect::<Vec<_>>().join("+");
    MatrixFamily::with_labels(format!("block({name})"), members, first.labels().to_vec())
}
