//! The commutative side: scalar potentials, their Markov equilibrium
//! measures, cylinder weights, and Kolmogorov-Sinai entropy.
//!
//! A normalized depth-2 scalar potential `J(ab)` has an exactly
//! representable equilibrium: the stationary vector of the column
//! transfer matrix `B(a,b) = J(ab)` together with the transition kernel
//! `M(a,b) = J(ab) pi(b) / pi(a)`. Everything downstream (cylinder
//! weights, integration, entropy) is closed-form from that pair, which is
//! what makes this module usable as an independent oracle.

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};
use crate::sft::{TransitionMatrix, Word};
use nalgebra::DMatrix;

/// A positive scalar potential, locally constant of depth 1 or 2.
#[derive(Debug, Clone)]
pub struct ScalarPotential<T: Scalar> {
    shift: TransitionMatrix,
    depth: usize,
    values: Vec<T>,
}

impl<T: Scalar> ScalarPotential<T> {
    /// A table of strictly positive values over the allowed depth-`m`
    /// words, in lexicographic order.
    pub fn from_values(shift: TransitionMatrix, depth: usize, values: Vec<T>) -> Result<Self> {
        if depth == 0 || depth > 2 {
            return Err(Error::InvalidScalarPotential(format!(
                "scalar potential depth must be 1 or 2, got {depth}"
            )));
        }
        let expected = shift.word_count(depth);
        if values.len() != expected {
            return Err(Error::InvalidScalarPotential(format!(
                "expected {expected} values for depth {depth}, got {}",
                values.len()
            )));
        }
        if values.iter().any(|&x| x <= T::zero()) {
            return Err(Error::InvalidScalarPotential(
                "scalar potential values must be strictly positive".into(),
            ));
        }
        Ok(ScalarPotential {
            shift,
            depth,
            values,
        })
    }

    /// The constant potential forced by normalization on a full shift:
    /// `J = 1/k`.
    pub fn uniform(k: usize) -> Self {
        let shift = TransitionMatrix::full_shift(k);
        let value = T::one() / real::<T>(k as f64);
        ScalarPotential {
            shift,
            depth: 1,
            values: vec![value; k],
        }
    }

    pub fn shift(&self) -> &TransitionMatrix {
        &self.shift
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// The value at a word of length `>= depth` (truncated to the prefix).
    pub fn eval(&self, w: &Word) -> Result<T> {
        if w.len() < self.depth {
            return Err(Error::WordTooShort {
                got: w.len(),
                depth: self.depth,
            });
        }
        if !self.shift.is_allowed(w) {
            return Err(Error::DisallowedWord {
                word: w.symbols().to_vec(),
            });
        }
        let idx = self.shift.word_index(&w.prefix(self.depth))?;
        Ok(self.values[idx])
    }

    /// The same potential re-tabulated at depth 2.
    pub fn lift_to_depth2(&self) -> Result<ScalarPotential<T>> {
        if self.depth == 2 {
            return Ok(self.clone());
        }
        let words = self.shift.allowed_words(2)?;
        let values = words
            .iter()
            .map(|w| self.eval(w))
            .collect::<Result<Vec<T>>>()?;
        ScalarPotential::from_values(self.shift.clone(), 2, values)
    }

    /// Max over symbols `b` of `|sum_{a: A(a,b)=1} J(ab) - 1|`.
    pub fn check_normalized(&self) -> T {
        let lifted = self.lift_to_depth2().expect("depth-2 lift within cap");
        let k = self.shift.symbol_count();
        let mut worst = T::zero();
        for b in 1..=k {
            let mut sum = T::zero();
            for a in self.shift.preimage_symbols(b) {
                let w = Word::new(vec![a, b]);
                sum += lifted.eval(&w).expect("allowed depth-2 word");
            }
            worst = worst.max((sum - T::one()).abs());
        }
        worst
    }

    /// The classical transfer operator on scalar tables:
    /// `(L f)(v) = sum_{a: A(a, v_1) = 1} J(av) f(av)`.
    ///
    /// `f` is a table over allowed depth-`n` words; the result has depth
    /// `max(m - 1, n, 1)` so that it is again exactly locally constant.
    pub fn scalar_apply(&self, f_depth: usize, f: &[T]) -> Result<(usize, Vec<T>)> {
        let expected = self.shift.word_count(f_depth);
        if f.len() != expected {
            return Err(Error::InvalidScalarPotential(format!(
                "expected {expected} table entries for depth {f_depth}, got {}",
                f.len()
            )));
        }
        let r = (self.depth - 1).max(f_depth).max(1);
        let words = self.shift.allowed_words(r)?;
        let mut out = Vec::with_capacity(words.len());
        for v in &words {
            let mut acc = T::zero();
            for a in self.shift.preimage_symbols(v.symbols()[0]) {
                let av = v.prepend(a);
                let weight = self.eval(&av)?;
                let idx = self.shift.word_index(&av.prefix(f_depth))?;
                acc += weight * f[idx];
            }
            out.push(acc);
        }
        Ok((r, out))
    }

    /// The equilibrium (Gibbs) measure of a normalized potential.
    pub fn equilibrium(&self) -> Result<MarkovMeasure<T>> {
        let tol = real::<T>(1e-12);
        let dev = self.check_normalized();
        if dev > real::<T>(1e-10) {
            return Err(Error::InvalidScalarPotential(format!(
                "potential is not normalized (deviation {:.3e})",
                dev.as_f64()
            )));
        }
        let lifted = self.lift_to_depth2()?;
        let k = self.shift.symbol_count();
        // B(a,b) = J(ab) for allowed transitions; columns sum to 1.
        let mut b_mat = DMatrix::zeros(k, k);
        for a in 1..=k {
            for b in 1..=k {
                if self.shift.allows(a, b) {
                    b_mat[(a - 1, b - 1)] = lifted.eval(&Word::new(vec![a, b]))?;
                }
            }
        }
        // Stationary vector: solve (B - I) pi = 0 with the normalization
        // sum(pi) = 1 replacing the last (redundant) row. Exact to machine
        // precision, unlike power iteration.
        let mut system = &b_mat - DMatrix::identity(k, k);
        let mut rhs = nalgebra::DVector::zeros(k);
        for b in 0..k {
            system[(k - 1, b)] = T::one();
        }
        rhs[k - 1] = T::one();
        let pi = system.lu().solve(&rhs).ok_or_else(|| {
            Error::InvalidMeasure("stationary system is singular".into())
        })?;
        let residual = (&b_mat * &pi - &pi).abs().max();
        if residual >= tol {
            return Err(Error::InvalidMeasure(format!(
                "stationary vector residual {:.3e} is too large",
                residual.as_f64()
            )));
        }
        if pi.iter().any(|&x| x <= T::zero()) {
            return Err(Error::InvalidMeasure(
                "stationary vector has a nonpositive entry".into(),
            ));
        }
        // M(a,b) = J(ab) pi(b) / pi(a): a row-stochastic kernel.
        let mut m = DMatrix::zeros(k, k);
        for a in 1..=k {
            for b in 1..=k {
                if self.shift.allows(a, b) {
                    m[(a - 1, b - 1)] =
                        lifted.eval(&Word::new(vec![a, b]))? * pi[b - 1] / pi[a - 1];
                }
            }
        }
        MarkovMeasure::new(self.shift.clone(), pi.iter().copied().collect(), m)
    }
}

/// A stationary Markov measure on the shift: a stationary vector `pi`
/// over symbols and a row-stochastic transition kernel `M`.
#[derive(Debug, Clone)]
pub struct MarkovMeasure<T: Scalar> {
    shift: TransitionMatrix,
    pi: Vec<T>,
    m: DMatrix<T>,
}

impl<T: Scalar> MarkovMeasure<T> {
    /// Validates stationarity (`pi M = pi`), stochasticity, and support.
    pub fn new(shift: TransitionMatrix, pi: Vec<T>, m: DMatrix<T>) -> Result<Self> {
        let k = shift.symbol_count();
        let tol = real::<T>(1e-9);
        if pi.len() != k || m.nrows() != k || m.ncols() != k {
            return Err(Error::InvalidMeasure(format!(
                "dimension mismatch for {k} symbols"
            )));
        }
        let total = pi.iter().fold(T::zero(), |acc, &x| acc + x);
        if (total - T::one()).abs() > tol {
            return Err(Error::InvalidMeasure(format!(
                "pi sums to {} instead of 1",
                total.as_f64()
            )));
        }
        for a in 0..k {
            let row_sum: T = m.row(a).iter().fold(T::zero(), |acc, &x| acc + x);
            if (row_sum - T::one()).abs() > tol {
                return Err(Error::InvalidMeasure(format!(
                    "kernel row {} sums to {} instead of 1",
                    a + 1,
                    row_sum.as_f64()
                )));
            }
            for b in 0..k {
                if !shift.allows(a + 1, b + 1) && m[(a, b)].abs() > tol {
                    return Err(Error::InvalidMeasure(format!(
                        "kernel charges the forbidden transition {} -> {}",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        for b in 0..k {
            let mut acc = T::zero();
            for a in 0..k {
                acc += pi[a] * m[(a, b)];
            }
            if (acc - pi[b]).abs() > tol {
                return Err(Error::InvalidMeasure(format!(
                    "pi is not stationary at symbol {} (defect {:.3e})",
                    b + 1,
                    (acc - pi[b]).abs().as_f64()
                )));
            }
        }
        Ok(MarkovMeasure { shift, pi, m })
    }

    pub fn shift(&self) -> &TransitionMatrix {
        &self.shift
    }

    pub fn stationary(&self) -> &[T] {
        &self.pi
    }

    pub fn kernel(&self) -> &DMatrix<T> {
        &self.m
    }

    /// `mu[w] = pi(w_1) prod_t M(w_t, w_{t+1})`.
    pub fn cylinder_weight(&self, w: &Word) -> Result<T> {
        if w.is_empty() {
            return Ok(T::one());
        }
        if !self.shift.is_allowed(w) {
            return Err(Error::DisallowedWord {
                word: w.symbols().to_vec(),
            });
        }
        let s = w.symbols();
        let mut weight = self.pi[s[0] - 1];
        for t in 0..s.len() - 1 {
            weight *= self.m[(s[t] - 1, s[t + 1] - 1)];
        }
        Ok(weight)
    }

    /// `int f dmu` for a table over allowed depth-`n` words.
    pub fn integrate(&self, f_depth: usize, f: &[T]) -> Result<T> {
        let words = self.shift.allowed_words(f_depth)?;
        if f.len() != words.len() {
            return Err(Error::InvalidMeasure(format!(
                "expected {} table entries for depth {f_depth}, got {}",
                words.len(),
                f.len()
            )));
        }
        let mut acc = T::zero();
        for (w, &fw) in words.iter().zip(f.iter()) {
            acc += self.cylinder_weight(w)? * fw;
        }
        Ok(acc)
    }

    /// Kolmogorov-Sinai entropy
    /// `-sum_a pi(a) sum_b M(a,b) log M(a,b)` with `0 log 0 = 0`.
    pub fn ks_entropy(&self) -> T {
        let k = self.shift.symbol_count();
        let mut h = T::zero();
        for a in 0..k {
            for b in 0..k {
                let p = self.m[(a, b)];
                if p > T::zero() {
                    h -= self.pi[a] * p * p.ln();
                }
            }
        }
        h
    }
}
