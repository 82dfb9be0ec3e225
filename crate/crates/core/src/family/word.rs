use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{JsrError, Result};

/// Non-empty index sequence naming the product `A_{i₁}·A_{i₂}·…·A_{i_k}`
/// (left-to-right).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(JsrError::Domain("a word must contain at least one index".into()));
        }
        Ok(Self(indices))
    }

    /// A word checked against an alphabet of `m` letters.
    pub fn for_alphabet(indices: Vec<usize>, m: usize) -> Result<Self> {
        if let Some(&index) = indices.iter().find(|&&i| i >= m) {
            return Err(JsrError::MalformedWord { index, m });
        }
        Self::new(indices)
    }

    pub fn single(i: usize) -> Self {
        Self(vec![i])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Left rotation by `r` positions.
    pub fn rotate(&self, r: usize) -> Word {
        let mut v = self.0.clone();
        v.rotate_left(r % self.len());
        Word(v)
    }

    pub fn rotations(&self) -> impl Iterator<Item = Word> + '_ {
        (0..self.len()).map(move |r| self.rotate(r))
    }

    /// Lexicographically least rotation.
    pub fn canonical_rotation(&self) -> Word {
        self.rotations().min().expect("non-empty word")
    }

    /// True iff no rotation is lexicographically smaller.
    pub fn is_canonical(&self) -> bool {
        is_canonical_slice(&self.0)
    }

    /// Length of the shortest `u` with `self = u^(len/|u|)`.
    pub fn primitive_period(&self) -> usize {
        let k = self.len();
        (1..=k)
            .find(|&p| k.is_multiple_of(p) && (p..k).all(|i| self.0[i] == self.0[i - p]))
            .unwrap_or(k)
    }

    /// True iff the word is not a repetition of a shorter word.
    pub fn is_primitive(&self) -> bool {
        self.primitive_period() == self.len()
    }

    pub fn primitive_root(&self) -> Word {
        Word(self.0[..self.primitive_period()].to_vec())
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn repeat(&self, times: usize) -> Word {
        assert!(times >= 1);
        Word(self.0.repeat(times))
    }

    /// Dash-separated form used in CSV output, e.g. `0-1-1`.
    pub fn compact(&self) -> String {
        self.0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("-")
    }
}

pub(crate) fn is_canonical_slice(w: &[usize]) -> bool {
    let k = w.len();
    (1..k).all(|r| {
        for t in 0..k {
            let a = w[t];
            let b = w[(t + r) % k];
            if a != b {
                return a < b;
            }
        }
        true
    })
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (t, i) in self.0.iter().enumerate() {
            if t > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Word {
    type Err = JsrError;

    /// Accepts `(0,1,1)`, `0,1,1`, `0-1-1` or `0 1 1`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let indices = body
            .split(|ch: char| ch == ',' || ch == '-' || ch.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|e| JsrError::Domain(format!("bad word index {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Word::new(indices)
    }
}

/// One canonical representative (least rotation) per cyclic class of words of
/// length `k` over `m` letters, in lexicographic order.
pub fn necklaces(m: usize, k: usize) -> Vec<Word> {
    assert!(m >= 1 && k >= 1, "alphabet and length must be positive");
    let mut out = Vec::new();
    // Iterative Fredricksen–Kessler–Maiorana prenecklace generation.
    let mut a = vec![0usize; k];
    out.push(Word(a.clone()));
    loop {
        let Some(i) = (0..k).rev().find(|&i| a[i] != m - 1) else {
            break;
        };
        a[i] += 1;
        for j in i + 1..k {
            a[j] = a[j - (i + 1)];
        }
        if k.is_multiple_of(i + 1) {
            out.push(Word(a.clone()));
        }
    }
    out
}

/// `m^k`, or `None` on overflow.
pub fn word_count(m: usize, k: usize) -> Option<u64> {
    (m as u64).checked_pow(u32::try_from(k).ok()?)
}

/// All `m^k` words of length `k`, in lexicographic order, provided their
/// number does not exceed `limit`.
pub fn all_words(m: usize, k: usize, limit: u64) -> Result<Vec<Word>> {
    assert!(m >= 1 && k >= 1, "alphabet and length must be positive");
    let count = word_count(m, k).unwrap_or(u64::MAX);
    if count > limit {
        return Err(JsrError::BudgetExceeded {
            budget: limit,
            needed: count,
            partial: None,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut a = vec![0usize; k];
    loop {
        out.push(Word(a.clone()));
        let Some(i) = (0..k).rev().find(|&i| a[i] != m - 1) else {
            break;
        };
        a[i] += 1;
        a[i + 1..].iter_mut().for_each(|x| *x = 0);
    }
    Ok(out)
}
