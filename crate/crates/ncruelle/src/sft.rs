//! Subshifts of finite type: 0/1 transition matrices, allowed finite words,
//! preimage enumeration, and the metric `d_theta`.
//!
//! Symbols are 1-based, matching the usual symbolic-dynamics convention.
//! Words are stored densely; the cylinder index of a word is its rank in the
//! lexicographic enumeration of allowed words of the same length.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::sync::OnceLock;

/// A `k x k` matrix of zeroes and ones describing the allowed transitions.
///
/// Construction rejects matrices with an all-zero row or column (dead
/// symbols). Aperiodicity is checked lazily and cached.
#[derive(Debug)]
pub struct TransitionMatrix {
    k: usize,
    entries: Vec<bool>,
    aperiodic: OnceLock<bool>,
}

impl Clone for TransitionMatrix {
    fn clone(&self) -> Self {
        TransitionMatrix {
            k: self.k,
            entries: self.entries.clone(),
            aperiodic: self.aperiodic.clone(),
        }
    }
}

impl PartialEq for TransitionMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.entries == other.entries
    }
}
impl Eq for TransitionMatrix {}

impl TransitionMatrix {
    /// Builds a transition matrix from rows of 0/1 integers.
    pub fn new(rows: &[Vec<u8>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::InvalidTransitionMatrix("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(k * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::InvalidTransitionMatrix(format!(
                    "expected {k} columns, got {}",
                    row.len()
                )));
            }
            for &e in row {
                if e > 1 {
                    return Err(Error::InvalidTransitionMatrix(format!(
                        "entry {e} is not 0 or 1"
                    )));
                }
                entries.push(e == 1);
            }
        }
        let m = TransitionMatrix {
            k,
            entries,
            aperiodic: OnceLock::new(),
        };
        for a in 1..=k {
            if (1..=k).all(|b| !m.allows(a, b)) {
                return Err(Error::InvalidTransitionMatrix(format!(
                    "symbol {a} has an all-zero row"
                )));
            }
            if (1..=k).all(|b| !m.allows(b, a)) {
                return Err(Error::InvalidTransitionMatrix(format!(
                    "symbol {a} has an all-zero column"
                )));
            }
        }
        Ok(m)
    }

    /// The full shift on `k` symbols.
    pub fn full_shift(k: usize) -> Self {
        TransitionMatrix::new(&vec![vec![1u8; k]; k]).expect("full shift is valid")
    }

    /// Number of symbols.
    pub fn symbol_count(&self) -> usize {
        self.k
    }

    /// Whether the transition `a -> b` is allowed (symbols 1-based).
    pub fn allows(&self, a: usize, b: usize) -> bool {
        debug_assert!(a >= 1 && a <= self.k && b >= 1 && b <= self.k);
        self.entries[(a - 1) * self.k + (b - 1)]
    }

    /// The rows as 0/1 integers, for config echo.
    pub fn rows(&self) -> Vec<Vec<u8>> {
        (1..=self.k)
            .map(|a| (1..=self.k).map(|b| self.allows(a, b) as u8).collect())
            .collect()
    }

    /// True iff some power `A^n`, `n <= (k-1)^2 + 1` (Wielandt bound), is
    /// entrywise positive.
    pub fn is_aperiodic(&self) -> bool {
        *self.aperiodic.get_or_init(|| {
            let k = self.k;
            let bound = (k - 1) * (k - 1) + 1;
            // Boolean matrix powers; counts saturate at 1.
            let mut power: Vec<bool> = self.entries.clone();
            for _ in 1..=bound {
                if power.iter().all(|&e| e) {
                    return true;
                }
                let mut next = vec![false; k * k];
                for i in 0..k {
                    for j in 0..k {
                        for l in 0..k {
                            if power[i * k + l] && self.entries[l * k + j] {
                                next[i * k + j] = true;
                                break;
                            }
                        }
                    }
                }
                power = next;
            }
            power.iter().all(|&e| e)
        })
    }

    /// Smallest `n` with `A^n` entrywise positive, if any within the
    /// Wielandt bound.
    pub fn aperiodicity_exponent(&self) -> Option<usize> {
        let k = self.k;
        let bound = (k - 1) * (k - 1) + 1;
        let mut power: Vec<bool> = self.entries.clone();
        for n in 1..=bound {
            if power.iter().all(|&e| e) {
                return Some(n);
            }
            let mut next = vec![false; k * k];
            for i in 0..k {
                for j in 0..k {
                    for l in 0..k {
                        if power[i * k + l] && self.entries[l * k + j] {
                            next[i * k + j] = true;
                            break;
                        }
                    }
                }
            }
            power = next;
        }
        if power.iter().all(|&e| e) {
            Some(bound + 1)
        } else {
            None
        }
    }

    /// The symbols `i` with `A(i, a) = 1`, ascending: the first symbols of
    /// the shift-preimages of any point starting with `a`.
    pub fn preimage_symbols(&self, a: usize) -> Vec<usize> {
        (1..=self.k).filter(|&i| self.allows(i, a)).collect()
    }

    /// Count of allowed words of length `n`.
    pub fn word_count(&self, n: usize) -> usize {
        if n == 0 {
            return 1;
        }
        // Column sums of A^(n-1), i.e. dynamic programming over end symbols.
        let mut counts = vec![1usize; self.k];
        for _ in 1..n {
            let mut next = vec![0usize; self.k];
            for a in 1..=self.k {
                for b in 1..=self.k {
                    if self.allows(a, b) {
                        next[a - 1] += counts[b - 1];
                    }
                }
            }
            counts = next;
        }
        counts.iter().sum()
    }

    /// All allowed words of length `n`, in lexicographic order.
    pub fn allowed_words(&self, n: usize) -> Result<Vec<Word>> {
        self.allowed_words_capped(n, crate::DEFAULT_CAPACITY_CAP)
    }

    /// As [`allowed_words`](Self::allowed_words), with an explicit cap on
    /// the number of words.
    pub fn allowed_words_capped(&self, n: usize, cap: usize) -> Result<Vec<Word>> {
        let count = self.word_count(n);
        if count > cap {
            return Err(Error::CapacityExceeded { needed: count, cap });
        }
        let mut out = Vec::with_capacity(count);
        let mut current = Vec::with_capacity(n);
        self.enumerate_into(n, &mut current, &mut out);
        Ok(out)
    }

    fn enumerate_into(&self, n: usize, current: &mut Vec<usize>, out: &mut Vec<Word>) {
        if current.len() == n {
            out.push(Word {
                symbols: current.clone(),
            });
            return;
        }
        for s in 1..=self.k {
            if let Some(&last) = current.last() {
                if !self.allows(last, s) {
                    continue;
                }
            }
            current.push(s);
            self.enumerate_into(n, current, out);
            current.pop();
        }
    }

    /// Lexicographic rank of an allowed word among allowed words of the same
    /// length. Used as the cylinder index in dense tables.
    pub fn word_index(&self, w: &Word) -> Result<usize> {
        if !self.is_allowed(w) {
            return Err(Error::DisallowedWord {
                word: w.symbols.clone(),
            });
        }
        // Count allowed words lexicographically smaller than w.
        let n = w.len();
        let mut rank = 0usize;
        for pos in 0..n {
            for s in 1..w.symbols[pos] {
                if pos > 0 && !self.allows(w.symbols[pos - 1], s) {
                    continue;
                }
                rank += self.suffix_count(s, n - pos - 1);
            }
        }
        Ok(rank)
    }

    /// Number of allowed continuations of length `m` after symbol `s`.
    fn suffix_count(&self, s: usize, m: usize) -> usize {
        let mut counts = vec![0usize; self.k];
        counts[s - 1] = 1;
        for _ in 0..m {
            let mut next = vec![0usize; self.k];
            for a in 1..=self.k {
                if counts[a - 1] == 0 {
                    continue;
                }
                for b in 1..=self.k {
                    if self.allows(a, b) {
                        next[b - 1] += counts[a - 1];
                    }
                }
            }
            counts = next;
        }
        counts.iter().sum()
    }

    /// Validity of a finite word under the transition rules.
    pub fn is_allowed(&self, w: &Word) -> bool {
        if w.symbols.iter().any(|&s| s == 0 || s > self.k) {
            return false;
        }
        w.symbols.windows(2).all(|p| self.allows(p[0], p[1]))
    }
}

/// A finite allowed word: a cylinder prefix of a point of the shift space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    symbols: Vec<usize>,
}

impl Word {
    /// Builds a word without checking transitions; use
    /// [`TransitionMatrix::is_allowed`] to validate.
    pub fn new(symbols: Vec<usize>) -> Self {
        Word { symbols }
    }

    pub fn empty() -> Self {
        Word { symbols: vec![] }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    /// The word truncated to its first `n` symbols.
    pub fn prefix(&self, n: usize) -> Word {
        Word {
            symbols: self.symbols[..n].to_vec(),
        }
    }

    /// The word with `s` prepended.
    pub fn prepend(&self, s: usize) -> Word {
        let mut symbols = Vec::with_capacity(self.len() + 1);
        symbols.push(s);
        symbols.extend_from_slice(&self.symbols);
        Word { symbols }
    }

    /// The word with its first symbol dropped (the shift).
    pub fn shifted(&self) -> Word {
        Word {
            symbols: self.symbols[1..].to_vec(),
        }
    }

    /// Length of the longest common prefix with `other`.
    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.symbols
            .iter()
            .zip(other.symbols.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.symbols {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// The metric `d_theta` on cylinder prefixes: `0` for equal words,
/// `theta^N` with `N` the 0-based index of first disagreement otherwise.
///
/// This satisfies `d(ix, iy) = theta * d(x, y)` and
/// `d(x, y) <= theta  =>  x_1 = y_1`.
pub fn d_theta<T: Scalar>(x: &Word, y: &Word, theta: T) -> Result<T> {
    let theta_f = theta.as_f64();
    if !(theta_f > 0.0 && theta_f < 1.0) {
        return Err(Error::InvalidTheta(theta_f));
    }
    assert_eq!(x.len(), y.len(), "d_theta expects equal-length prefixes");
    match (0..x.len()).find(|&i| x.symbols[i] != y.symbols[i]) {
        None => Ok(T::zero()),
        Some(n) => Ok(theta.powi(n as i32)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_mean() -> TransitionMatrix {
        TransitionMatrix::new(&[vec![1, 1], vec![1, 0]]).unwrap()
    }

    #[test]
    fn aperiodicity_verdicts() {
        assert!(TransitionMatrix::full_shift(2).is_aperiodic());
        let period2 = TransitionMatrix::new(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert!(!period2.is_aperiodic());
        assert!(golden_mean().is_aperiodic());
    }

    #[test]
    fn aperiodicity_matches_wielandt_brute_force_k_le_3() {
        // All 0/1 matrices without dead symbols, k <= 3.
        for k in 1..=3usize {
            let cells = k * k;
            'outer: for mask in 0..(1u32 << cells) {
                let rows: Vec<Vec<u8>> = (0..k)
                    .map(|i| (0..k).map(|j| ((mask >> (i * k + j)) & 1) as u8).collect())
                    .collect();
                let m = match TransitionMatrix::new(&rows) {
                    Ok(m) => m,
                    Err(_) => continue 'outer,
                };
                // Brute force: integer powers up to the Wielandt bound.
                let bound = (k - 1) * (k - 1) + 1;
                let mut p = vec![vec![0u64; k]; k];
                for (i, row) in rows.iter().enumerate() {
                    for (j, &e) in row.iter().enumerate() {
                        p[i][j] = e as u64;
                    }
                }
                let mut positive = p.iter().flatten().all(|&e| e > 0);
                for _ in 1..bound {
                    if positive {
                        break;
                    }
                    let mut q = vec![vec![0u64; k]; k];
                    for i in 0..k {
                        for j in 0..k {
                            for l in 0..k {
                                q[i][j] = (q[i][j] + p[i][l] * rows[l][j] as u64).min(1_000_000);
                            }
                        }
                    }
                    p = q;
                    positive = p.iter().flatten().all(|&e| e > 0);
                }
                assert_eq!(m.is_aperiodic(), positive, "matrix {rows:?}");
            }
        }
    }

    #[test]
    fn dead_symbol_rejected() {
        assert!(TransitionMatrix::new(&[vec![1, 0], vec![1, 0]]).is_err());
        assert!(TransitionMatrix::new(&[vec![0, 0], vec![1, 1]]).is_err());
    }

    #[test]
    fn allowed_word_counts() {
        let full = TransitionMatrix::full_shift(2);
        assert_eq!(full.allowed_words(3).unwrap().len(), 8);
        assert_eq!(full.allowed_words(1).unwrap().len(), 2);
        let gm = golden_mean();
        let words = gm.allowed_words(3).unwrap();
        assert_eq!(words.len(), 5);
        let expected: Vec<Vec<usize>> = vec![
            vec![1, 1, 1],
            vec![1, 1, 2],
            vec![1, 2, 1],
            vec![2, 1, 1],
            vec![2, 1, 2],
        ];
        let got: Vec<Vec<usize>> = words.iter().map(|w| w.symbols().to_vec()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn word_count_recursion_matches_enumeration() {
        for m in [TransitionMatrix::full_shift(3), golden_mean()] {
            for n in 0..=6 {
                assert_eq!(m.word_count(n), m.allowed_words(n).unwrap().len());
            }
        }
    }

    #[test]
    fn word_index_is_lexicographic_rank() {
        let gm = golden_mean();
        for n in 0..=5 {
            for (i, w) in gm.allowed_words(n).unwrap().iter().enumerate() {
                assert_eq!(gm.word_index(w).unwrap(), i);
            }
        }
    }

    #[test]
    fn capacity_cap_is_explicit() {
        let full = TransitionMatrix::full_shift(2);
        match full.allowed_words_capped(10, 100) {
            Err(Error::CapacityExceeded { needed, cap }) => {
                assert_eq!(needed, 1024);
                assert_eq!(cap, 100);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn preimage_symbols_read_columns() {
        let full = TransitionMatrix::full_shift(2);
        assert_eq!(full.preimage_symbols(1), vec![1, 2]);
        let gm = golden_mean();
        assert_eq!(gm.preimage_symbols(2), vec![1]);
        assert_eq!(gm.preimage_symbols(1), vec![1, 2]);
    }

    #[test]
    fn d_theta_values() {
        let x = Word::new(vec![1, 2, 1]);
        let y = Word::new(vec![1, 2, 2]);
        assert_eq!(d_theta(&x, &x, 0.5).unwrap(), 0.0);
        assert_eq!(d_theta(&x, &y, 0.5).unwrap(), 0.25);
        let z = Word::new(vec![2, 2, 1]);
        assert_eq!(d_theta(&x, &z, 0.5).unwrap(), 1.0);
        assert!(d_theta::<f64>(&x, &y, 1.5).is_err());
    }

    #[test]
    fn d_theta_contracts_under_prepending() {
        let theta = 0.37f64;
        let x = Word::new(vec![1, 2, 1, 1]);
        let y = Word::new(vec![1, 2, 2, 1]);
        let d = d_theta(&x, &y, theta).unwrap();
        for i in 1..=2 {
            let dx = d_theta(&x.prepend(i), &y.prepend(i), theta).unwrap();
            assert_eq!(dx, theta * d);
        }
    }
}
