use std::collections::HashMap;

use super::{MatrixFamily, Word};
use crate::error::{JsrError, Result};
use crate::linalg::ComplexMatrix;

fn check_word(family: &MatrixFamily, word: &Word) -> Result<()> {
    let m = family.len();
    match word.indices().iter().find(|&&i| i >= m) {
        Some(&index) => Err(JsrError::MalformedWord { index, m }),
        None => Ok(()),
    }
}

/// `A_{i₁}·A_{i₂}·…·A_{i_k}`, associated strictly left to right.
pub fn evaluate_word(family: &MatrixFamily, word: &Word) -> Result<ComplexMatrix> {
    check_word(family, word)?;
    let idx = word.indices();
    let mut p = family.member(idx[0]).clone();
    for &i in &idx[1..] {
        p = p.mul(family.member(i));
    }
    Ok(p)
}

/// Memo of evaluated prefixes. Entries are produced by the same
/// left-to-right recurrence as [`evaluate_word`], so cached and fresh
/// results are bit-identical.
#[derive(Debug, Default, Clone)]
pub struct ProductCache {
    map: HashMap<Vec<usize>, ComplexMatrix>,
    hits: u64,
    misses: u64,
}

impl ProductCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn evaluate(&mut self, family: &MatrixFamily, word: &Word) -> Result<ComplexMatrix> {
        check_word(family, word)?;
        let idx = word.indices();
        if let Some(p) = self.map.get(idx) {
            self.hits += 1;
            return Ok(p.clone());
        }
        self.misses += 1;
        let start = (1..idx.len()).rev().find(|&l| self.map.contains_key(&idx[..l])).unwrap_or(0);
        let mut p = if start == 0 {
            let first = family.member(idx[0]).clone();
            self.map.insert(idx[..1].to_vec(), first.clone());
            first
        } else {
            self.map[&idx[..start]].clone()
        };
        for l in start.max(1)..idx.len() {
            p = p.mul(family.member(idx[l]));
            self.map.insert(idx[..=l].to_vec(), p.clone());
        }
        Ok(p)
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn clear(&mut self) {
        self.map.clear();
    }
}

/// Depth-first product evaluation over a lexicographically sorted word
/// sequence: the product of the longest prefix shared with the previous word
/// is reused, so a full level of `m^k` words costs about one multiplication
/// per word.
pub struct PrefixProducts<'a> {
    members: &'a [ComplexMatrix],
    prefix: Vec<usize>,
    stack: Vec<ComplexMatrix>,
    multiplications: u64,
}

impl<'a> PrefixProducts<'a> {
    pub fn new(members: &'a [ComplexMatrix]) -> Self {
        Self { members, prefix: Vec::new(), stack: Vec::new(), multiplications: 0 }
    }

    /// Product for `word`; indices must be valid for the member slice.
    pub fn product(&mut self, word: &[usize]) -> &ComplexMatrix {
        assert!(!word.is_empty(), "empty word");
        let lcp = self.prefix.iter().zip(word).take_while(|(a, b)| a == b).count();
        self.prefix.truncate(lcp);
        self.stack.truncate(lcp);
        for &i in &word[lcp..] {
            let next = match self.stack.last() {
                None => self.members[i].clone(),
                Some(p) => {
                    self.multiplications += 1;
                    p.mul(&self.members[i])
                }
            };
            self.prefix.push(i);
            self.stack.push(next);
        }
        self.stack.last().expect("non-empty word")
    }

    /// Matrix multiplications performed so far.
    pub fn multiplications(&self) -> u64 {
        self.multiplications
    }
}

/// Multiplications [`PrefixProducts`] spends on `words` taken in order.
pub fn prefix_cost<'w>(words: impl IntoIterator<Item = &'w Word>) -> u64 {
    let mut prev: &[usize] = &[];
    let mut cost = 0u64;
    for w in words {
        let idx = w.indices();
        let lcp = prev.iter().zip(idx).take_while(|(a, b)| a == b).count();
        cost += (idx.len() - lcp.max(1)) as u64;
        prev = idx;
    }
    cost
}

/// Multiplications needed for every word of length `k` over `m` letters:
/// one per node of the prefix tree below depth one.
pub fn all_words_cost(m: usize, k: usize) -> u64 {
    let mut total: u64 = 0;
    let mut level: u64 = m as u64;
    for _ in 2..=k {
        level = level.saturating_mul(m as u64);
        total = total.saturating_add(level);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{all_words, necklaces};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blondel() -> MatrixFamily {
        MatrixFamily::new(
            "blondel",
            vec![
                ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap(),
                ComplexMatrix::from_real_rows(&[[1.0, 0.0], [1.0, 1.0]]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn random_family(rng: &mut ChaCha8Rng, m: usize, n: usize) -> MatrixFamily {
        let members = (0..m)
            .map(|_| {
                let rows: Vec<Vec<Complex64>> = (0..n)
                    .map(|_| (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
                    .collect();
                ComplexMatrix::from_rows(&rows).unwrap()
            })
            .collect();
        MatrixFamily::new("random", members).unwrap()
    }

    #[test]
    fn word_products() {
        let f = blondel();
        let ab = evaluate_word(&f, &Word::new(vec![0, 1]).unwrap()).unwrap();
        assert_eq!(ab, ComplexMatrix::from_real_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap());
        let ba = evaluate_word(&f, &Word::new(vec![1, 0]).unwrap()).unwrap();
        assert_eq!(ba, ComplexMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 2.0]]).unwrap());
        let single = MatrixFamily::new("a", vec![f.member(0).clone()]).unwrap();
        let a3 = evaluate_word(&single, &Word::new(vec![0, 0, 0]).unwrap()).unwrap();
        assert_eq!(a3, f.member(0).pow(3));
        let bad = evaluate_word(&f, &Word::new(vec![0, 2]).unwrap());
        assert!(matches!(bad, Err(JsrError::MalformedWord { index: 2, m: 2 })));
    }

    #[test]
    fn cache_and_prefix_walk_are_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = random_family(&mut rng, 3, 3);
            let mut cache = ProductCache::new();
            let words = all_words(3, 4, u64::MAX).unwrap();
            let mut walk = PrefixProducts::new(f.members());
            for w in &words {
                let fresh = evaluate_word(&f, w).unwrap();
                assert_eq!(cache.evaluate(&f, w).unwrap(), fresh);
                assert_eq!(walk.product(w.indices()), &fresh);
            }
            // second pass hits every time
            for w in &words {
                let fresh = evaluate_word(&f, w).unwrap();
                assert_eq!(cache.evaluate(&f, w).unwrap(), fresh);
            }
            assert_eq!(cache.hits(), words.len() as u64);
            assert_eq!(walk.multiplications(), all_words_cost(3, 4));
            assert_eq!(prefix_cost(&words), all_words_cost(3, 4));
        }
    }

    #[test]
    fn necklace_walk_cost_matches_estimate() {
        let f = blondel();
        let words = necklaces(2, 9);
        let mut walk = PrefixProducts::new(f.members());
        for w in &words {
            walk.product(w.indices());
        }
        assert_eq!(walk.multiplications(), prefix_cost(&words));
        assert!(prefix_cost(&words) < all_words_cost(2, 9));
    }

    #[test]
    fn idempotent_evaluation() {
        let f = blondel();
        let w = Word::new(vec![1, 0, 1, 1]).unwrap();
        assert_eq!(evaluate_word(&f, &w).unwrap(), evaluate_word(&f, &w).unwrap());
    }
}
