//! Exact locally constant algebra-valued functions on the shift space: the
//! objects the transfer operator acts on. A depth-`n` cylinder function is a
//! table over the allowed words of length `n`; depth 0 is a constant.

use crate::algebra::{AlgebraDescriptor, Element};
use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};
use crate::sft::{TransitionMatrix, Word};

/// A locally constant function from the shift space into the algebra.
#[derive(Debug, Clone)]
pub struct CylinderFunction<T: Scalar> {
    descriptor: AlgebraDescriptor,
    shift: TransitionMatrix,
    depth: usize,
    /// Values indexed by the lexicographic rank of the allowed word.
    values: Vec<Element<T>>,
}

impl<T: Scalar> CylinderFunction<T> {
    /// Builds a function from per-word values, in lexicographic word order.
    pub fn from_values(
        descriptor: AlgebraDescriptor,
        shift: TransitionMatrix,
        depth: usize,
        values: Vec<Element<T>>,
    ) -> Result<Self> {
        let expected = shift.word_count(depth);
        if values.len() != expected {
            return Err(Error::InvalidPotential(format!(
                "expected {expected} values for depth {depth}, got {}",
                values.len()
            )));
        }
        for v in &values {
            if v.descriptor() != descriptor {
                return Err(Error::DescriptorMismatch(
                    "cylinder value has wrong descriptor".into(),
                ));
            }
        }
        Ok(CylinderFunction {
            descriptor,
            shift,
            depth,
            values,
        })
    }

    /// The constant function with value `a`.
    pub fn constant(a: Element<T>, shift: TransitionMatrix) -> Self {
        CylinderFunction {
            descriptor: a.descriptor(),
            shift,
            depth: 0,
            values: vec![a],
        }
    }

    /// The constant identity function.
    pub fn unit(descriptor: AlgebraDescriptor, shift: TransitionMatrix) -> Self {
        CylinderFunction::constant(Element::identity(descriptor), shift)
    }

    /// Builds a depth-`n` function by evaluating `f` on each allowed word.
    pub fn from_fn(
        descriptor: AlgebraDescriptor,
        shift: TransitionMatrix,
        depth: usize,
        mut f: impl FnMut(&Word) -> Element<T>,
    ) -> Result<Self> {
        let words = shift.allowed_words(depth)?;
        let values = words.iter().map(&mut f).collect();
        CylinderFunction::from_values(descriptor, shift, depth, values)
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        self.descriptor
    }

    pub fn shift(&self) -> &TransitionMatrix {
        &self.shift
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[Element<T>] {
        &self.values
    }

    /// Value at the cylinder with index `i` (lexicographic rank).
    pub fn value_at_index(&self, i: usize) -> &Element<T> {
        &self.values[i]
    }

    /// Evaluates at a word of length `>= depth` by truncating to the prefix.
    pub fn eval(&self, w: &Word) -> Result<Element<T>> {
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
        Ok(self.values[idx].clone())
    }

    /// The same function represented on the finer depth-`n` table.
    pub fn lift_depth(&self, n: usize) -> Result<CylinderFunction<T>> {
        if n < self.depth {
            return Err(Error::InvalidPotential(format!(
                "cannot lift depth {} function to shallower depth {n}",
                self.depth
            )));
        }
        if n == self.depth {
            return Ok(self.clone());
        }
        let words = self.shift.allowed_words(n)?;
        let values = words
            .iter()
            .map(|w| {
                let idx = self.shift.word_index(&w.prefix(self.depth)).expect("prefix allowed");
                self.values[idx].clone()
            })
            .collect();
        CylinderFunction::from_values(self.descriptor, self.shift.clone(), n, values)
    }

    /// `sup` over the shift space of the algebra norm of the values.
    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.norm()))
    }

    /// The Lipschitz seminorm `|g|_theta`, exact on locally constant
    /// functions: max over word pairs of `|g(w) - g(w')| / theta^j` with `j`
    /// the common prefix length.
    pub fn theta_seminorm(&self, theta: T) -> Result<T> {
        let theta_f = theta.as_f64();
        if !(theta_f > 0.0 && theta_f < 1.0) {
            return Err(Error::InvalidTheta(theta_f));
        }
        if self.depth == 0 {
            return Ok(T::zero());
        }
        let words = self.shift.allowed_words(self.depth)?;
        let mut best = T::zero();
        for (i, wi) in words.iter().enumerate() {
            for (j, wj) in words.iter().enumerate().skip(i + 1) {
                let prefix = wi.common_prefix_len(wj);
                let dist = self.values[i].sub(&self.values[j]).norm();
                best = best.max(dist / theta.powi(prefix as i32));
            }
        }
        Ok(best)
    }

    /// Convergence detector for the iteration toward `c * identity`:
    /// returns `(spread, off_identity)` where `spread` is the max pairwise
    /// value distance and `off_identity` the distance of the mean value from
    /// the span of the identity.
    pub fn diameter(&self) -> (T, T) {
        let mut spread = T::zero();
        for (i, vi) in self.values.iter().enumerate() {
            for vj in self.values.iter().skip(i + 1) {
                spread = spread.max(vi.sub(vj).norm());
            }
        }
        let count = real::<T>(self.values.len() as f64);
        let mean = self
            .values
            .iter()
            .fold(Element::zero(self.descriptor), |acc, v| acc.add(v))
            .scale(T::one() / count);
        // tr^(mean) is the trace-orthogonal projection onto span{identity}.
        let c = mean.normalized_trace();
        let off_identity = mean.sub(&Element::identity(self.descriptor).scale(c)).norm();
        (spread, off_identity)
    }

    /// The composition with the shift: a depth-`n+1` function with
    /// `(g o sigma)(w) = g(w_2 ... w_{n+1})`.
    pub fn compose_shift(&self) -> CylinderFunction<T> {
        let n = self.depth + 1;
        let words = self
            .shift
            .allowed_words(n)
            .expect("depth+1 stays within cap for representable functions");
        let values = words
            .iter()
            .map(|w| {
                let idx = self
                    .shift
                    .word_index(&w.shifted().prefix(self.depth))
                    .expect("shifted prefix allowed");
                self.values[idx].clone()
            })
            .collect();
        CylinderFunction::from_values(self.descriptor, self.shift.clone(), n, values)
            .expect("complete table")
    }

    /// Pointwise linear combination `self + c * other` after lifting both
    /// to a common depth.
    pub fn add_scaled(&self, other: &CylinderFunction<T>, c: T) -> Result<CylinderFunction<T>> {
        if self.descriptor != other.descriptor {
            return Err(Error::DescriptorMismatch(
                "cylinder function combination".into(),
            ));
        }
        let depth = self.depth.max(other.depth);
        let a = self.lift_depth(depth)?;
        let b = other.lift_depth(depth)?;
        let values = a
            .values
            .iter()
            .zip(b.values.iter())
            .map(|(x, y)| x.add(&y.scale(c)))
            .collect();
        CylinderFunction::from_values(self.descriptor, self.shift.clone(), depth, values)
    }

    /// Max over words of the algebra norm of the pointwise difference.
    pub fn distance(&self, other: &CylinderFunction<T>) -> Result<T> {
        Ok(self.add_scaled(other, -T::one())?.sup_norm())
    }

    /// The scalar-valued normalized-trace function, as a `d = 1` cylinder
    /// function over the same shift.
    pub fn normalized_trace_function(&self) -> CylinderFunction<T> {
        let values = self
            .values
            .iter()
            .map(|v| {
                Element::from_matrix(nalgebra::DMatrix::from_element(1, 1, v.normalized_trace()))
            })
            .collect();
        CylinderFunction::from_values(
            AlgebraDescriptor::Matrix(1),
            self.shift.clone(),
            self.depth,
            values,
        )
        .expect("same table shape")
    }
}
