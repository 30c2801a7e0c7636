//! The Gibbs eigenstate `eta`: the unique faithful state with
//! `eta(L g) = eta(g)`, represented by positive weight elements over the
//! depth-`n` cylinders, so that `eta(g) = sum_w <rho_w, g(w)>` in the
//! trace pairing.
//!
//! Extraction goes through shifted inverse iteration on the transpose of
//! the finite section; the closed forms from the worked examples are kept
//! alongside as independent oracles.

use crate::algebra::{AlgebraDescriptor, Element};
use crate::classical::ScalarPotential;
use crate::cylfun::CylinderFunction;
use crate::error::{Error, Result};
use crate::potential::{Family, Potential};
use crate::scalar::{real, Scalar};
use crate::transfer::{apply_at_depth, TransferMatrix};
use nalgebra::{DMatrix, DVector};

/// The eigenstate of `L^*`, tabulated as one positive weight element per
/// depth-`n` word and normalized to `eta(Id) = 1`.
#[derive(Debug, Clone)]
pub struct Eigenstate<T: Scalar> {
    phi: Potential<T>,
    depth: usize,
    weights: Vec<Element<T>>,
    residual: T,
}

/// The trace pairing `<rho, a> = tr(rho^T a)` (entrywise dot product;
/// the plain dot product in the vector kind).
pub fn pair<T: Scalar>(rho: &Element<T>, a: &Element<T>) -> T {
    rho.data().dot(a.data())
}

impl<T: Scalar> Eigenstate<T> {
    /// Wraps an explicit weight table: weights must be positive and are
    /// normalized so that `eta(Id) = 1`.
    pub fn from_weights(
        phi: Potential<T>,
        depth: usize,
        weights: Vec<Element<T>>,
    ) -> Result<Self> {
        let expected = phi.shift().word_count(depth);
        if weights.len() != expected {
            return Err(Error::Eigensolver(format!(
                "expected {expected} weights for depth {depth}, got {}",
                weights.len()
            )));
        }
        let tol = real::<T>(1e-8);
        let id = Element::identity(phi.descriptor());
        let mut total = T::zero();
        for rho in &weights {
            if rho.descriptor() != phi.descriptor() {
                return Err(Error::DescriptorMismatch(
                    "weight has wrong descriptor".into(),
                ));
            }
            if !rho.is_positive(tol) {
                return Err(Error::Eigensolver(
                    "eigenstate weight is not positive".into(),
                ));
            }
            total += pair(rho, &id);
        }
        if total <= T::zero() {
            return Err(Error::Eigensolver("eigenstate has zero mass".into()));
        }
        let weights = weights
            .into_iter()
            .map(|rho| rho.scale(T::one() / total))
            .collect();
        let mut state = Eigenstate {
            phi,
            depth,
            weights,
            residual: T::zero(),
        };
        state.residual = state.check_fixed()?;
        Ok(state)
    }

    /// Extracts the eigenstate from the finite section at `depth` by
    /// shifted inverse iteration on the transposed section matrix.
    ///
    /// Fails with [`Error::DegenerateLeadingEigenvalue`] when the leading
    /// eigenvalue is not simple, and with [`Error::Eigensolver`] when the
    /// leading eigenvalue is not 1 (unnormalized potential) or the left
    /// eigenvector is not positive.
    pub fn extract(phi: &Potential<T>, depth: usize) -> Result<Self> {
        let section = TransferMatrix::assemble(phi, depth)?;
        let spectrum = section.spectrum();
        let lambda1_defect = ((spectrum.lambda1.re - T::one()).powi(2)
            + spectrum.lambda1.im.powi(2))
        .sqrt();
        if lambda1_defect > real::<T>(1e-6) {
            return Err(Error::Eigensolver(format!(
                "leading eigenvalue {:.6} + {:.2e} i is not 1; is the potential normalized?",
                spectrum.lambda1.re.as_f64(),
                spectrum.lambda1.im.as_f64()
            )));
        }
        if spectrum.leading_multiplicity > 1 {
            return Err(Error::DegenerateLeadingEigenvalue {
                count: spectrum.leading_multiplicity,
                tol: 1e-8,
            });
        }

        let dim = section.matrix().nrows();
        let transposed = section.matrix().transpose();
        let eps = T::default_epsilon();
        let mut shift = T::one() + eps.sqrt();
        let vector = loop {
            let shifted = &transposed - DMatrix::identity(dim, dim) * shift;
            let lu = shifted.lu();
            let mut x = DVector::from_element(dim, T::one());
            let mut solved = true;
            let tol = eps * real::<T>(1e4);
            for _ in 0..200 {
                match lu.solve(&x) {
                    Some(next) => {
                        let scale = next.abs().max();
                        if scale == T::zero() {
                            solved = false;
                            break;
                        }
                        x = next / scale;
                    }
                    None => {
                        solved = false;
                        break;
                    }
                }
                let residual = (&transposed * &x - &x).abs().max();
                if residual < tol {
                    break;
                }
            }
            if solved {
                break x;
            }
            // The shifted matrix was singular to working precision; back
            // the shift off further from the eigenvalue.
            shift += eps.sqrt();
            if shift > T::one() + real::<T>(1e-3) {
                return Err(Error::Eigensolver(
                    "inverse iteration failed: shifted section stays singular".into(),
                ));
            }
        };

        let block = section.block_dim();
        let descriptor = phi.descriptor();
        let mut weights: Vec<Element<T>> = (0..dim / block)
            .map(|w| {
                let rho = Element::devectorize(
                    descriptor,
                    &x_rows(&vector, w * block, block),
                );
                symmetrize(&rho)
            })
            .collect();
        let id = Element::identity(descriptor);
        let total: T = weights.iter().map(|rho| pair(rho, &id)).fold(T::zero(), |a, b| a + b);
        if total < T::zero() {
            for rho in &mut weights {
                *rho = rho.scale(-T::one());
            }
        }
        Eigenstate::from_weights(phi.clone(), depth, weights)
    }

    pub fn phi(&self) -> &Potential<T> {
        &self.phi
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn weights(&self) -> &[Element<T>] {
        &self.weights
    }

    /// Fixed-point residual `max |(T^t w - w)|` recorded at construction.
    pub fn residual(&self) -> T {
        self.residual
    }

    /// `eta(g)`. Functions deeper than the tabulated depth are reduced
    /// exactly through `eta(g) = eta(L g)`, using the depth-reducing form
    /// of the transfer operator.
    pub fn evaluate(&self, g: &CylinderFunction<T>) -> Result<T> {
        if g.descriptor() != self.phi.descriptor() {
            return Err(Error::DescriptorMismatch(
                "function lives on a different algebra".into(),
            ));
        }
        if g.shift() != self.phi.shift() {
            return Err(Error::ShiftMismatch);
        }
        let mut current = g.clone();
        while current.depth() > self.depth {
            let r = (self.phi.depth() - 1).max(current.depth() - 1).max(1);
            if r >= current.depth() {
                return Err(Error::Eigensolver(format!(
                    "cannot reduce function of depth {} to tabulation depth {}",
                    g.depth(),
                    self.depth
                )));
            }
            current = apply_at_depth(&self.phi, &current, r)?;
        }
        let words = self.phi.shift().allowed_words(self.depth)?;
        let mut acc = T::zero();
        for (rho, w) in self.weights.iter().zip(words.iter()) {
            acc += pair(rho, &current.eval(w)?);
        }
        Ok(acc)
    }

    /// Residual of the fixed-point equation `eta . L = eta` on the
    /// section at the tabulation depth.
    pub fn check_fixed(&self) -> Result<T> {
        let section = TransferMatrix::assemble(&self.phi, self.depth)?;
        let block = section.block_dim();
        let mut w = DVector::zeros(self.weights.len() * block);
        for (i, rho) in self.weights.iter().enumerate() {
            w.rows_mut(i * block, block).copy_from(&rho.vectorize());
        }
        let image = section.matrix().transpose() * &w;
        Ok((image - w).abs().max())
    }

    /// `|eta(g . sigma) - eta(g)|`: shift invariance of the eigenstate.
    pub fn check_shift_invariant(&self, g: &CylinderFunction<T>) -> Result<T> {
        let direct = self.evaluate(g)?;
        let shifted = self.evaluate(&g.compose_shift())?;
        Ok((shifted - direct).abs())
    }

    /// Closed form for trace-type potentials:
    /// `eta(g) = int tr^(g) dmu` with `mu` the classical equilibrium of
    /// the scalar potential `tr^ P`.
    pub fn closed_form_trace_type(phi: &Potential<T>, depth: usize) -> Result<Self> {
        let scalars = phi.scalar_trace_potential().ok_or_else(|| {
            Error::InvalidPotential("closed form requires a trace-type potential".into())
        })?;
        let j = ScalarPotential::from_values(phi.shift().clone(), phi.depth(), scalars)?;
        let mu = j.equilibrium()?;
        let d = real::<T>(phi.descriptor().side() as f64);
        let words = phi.shift().allowed_words(depth)?;
        let weights = words
            .iter()
            .map(|w| {
                Ok(Element::identity(phi.descriptor())
                    .scale(mu.cylinder_weight(w)? / d))
            })
            .collect::<Result<Vec<_>>>()?;
        Eigenstate::from_weights(phi.clone(), depth, weights)
    }

    /// Closed form for the depolarizing family: the uniform Bernoulli
    /// measure tensored with the normalized trace.
    pub fn closed_form_depolarizing(phi: &Potential<T>, depth: usize) -> Result<Self> {
        if !matches!(phi.family(), Family::Depolarizing { .. }) {
            return Err(Error::InvalidPotential(
                "closed form requires a depolarizing potential".into(),
            ));
        }
        let k = phi.shift().symbol_count();
        let d = real::<T>(phi.descriptor().side() as f64);
        let mass = real::<T>((k as f64).powi(depth as i32)).powi(-1) / d;
        let count = phi.shift().word_count(depth);
        let weights = vec![Element::identity(phi.descriptor()).scale(mass); count];
        Eigenstate::from_weights(phi.clone(), depth, weights)
    }

    /// Closed form for the branch-split Kraus family:
    /// `rho_w = mu[w_n ... w_1] E_{w_1 w_1}` with `mu` the stationary
    /// Markov measure of the row-stochastic `P`.
    pub fn closed_form_kraus(phi: &Potential<T>, depth: usize) -> Result<Self> {
        let p = match phi.family() {
            Family::KrausSplit { p_matrix } => p_matrix.clone(),
            _ => {
                return Err(Error::InvalidPotential(
                    "closed form requires a branch-split Kraus potential".into(),
                ))
            }
        };
        // pi P = pi for the 2 x 2 row-stochastic P.
        let denom = p[(0, 1)] + p[(1, 0)];
        let pi = [p[(1, 0)] / denom, p[(0, 1)] / denom];
        let words = phi.shift().allowed_words(depth)?;
        let weights = words
            .iter()
            .map(|w| {
                let s = w.symbols();
                let mut c = pi[s[depth - 1] - 1];
                for t in 0..depth - 1 {
                    c *= p[(s[t + 1] - 1, s[t] - 1)];
                }
                let mut e = DMatrix::zeros(2, 2);
                e[(s[0] - 1, s[0] - 1)] = c;
                Element::from_matrix(e)
            })
            .collect();
        Eigenstate::from_weights(phi.clone(), depth, weights)
    }

    /// Closed form for vector tables that fix the uniform vector:
    /// the uniform Bernoulli measure tensored with the entry mean.
    /// Requires `M_w^T u = (1/k) u` for every table (`u` uniform), which
    /// holds for the uniform and interpolated families.
    pub fn closed_form_vector_uniform(phi: &Potential<T>, depth: usize) -> Result<Self> {
        let n = match phi.descriptor() {
            AlgebraDescriptor::Vector(n) => n,
            AlgebraDescriptor::Matrix(_) => {
                return Err(Error::InvalidPotential(
                    "closed form requires a vector-kind potential".into(),
                ))
            }
        };
        let k = phi.shift().symbol_count();
        let inv_k = T::one() / real::<T>(k as f64);
        let u = DVector::from_element(n, T::one() / real::<T>(n as f64));
        for map in phi.maps() {
            let image = map.action().transpose() * &u;
            if (image - &u * inv_k).abs().max() > real::<T>(1e-12) {
                return Err(Error::InvalidPotential(
                    "vector table does not fix the uniform weight".into(),
                ));
            }
        }
        let mass = real::<T>((k as f64).powi(depth as i32)).powi(-1);
        let count = phi.shift().word_count(depth);
        let weights = vec![Element::from_vector(&u * mass); count];
        Eigenstate::from_weights(phi.clone(), depth, weights)
    }

    /// Max distance between the weight tables of two eigenstates at the
    /// same depth.
    pub fn distance(&self, other: &Eigenstate<T>) -> Result<T> {
        if self.depth != other.depth || self.weights.len() != other.weights.len() {
            return Err(Error::Eigensolver(
                "eigenstates are tabulated at different depths".into(),
            ));
        }
        let mut worst = T::zero();
        for (a, b) in self.weights.iter().zip(other.weights.iter()) {
            worst = worst.max(a.sub(b).norm());
        }
        Ok(worst)
    }
}

fn x_rows<T: Scalar>(v: &DVector<T>, start: usize, len: usize) -> DVector<T> {
    v.rows(start, len).into_owned()
}

fn symmetrize<T: Scalar>(rho: &Element<T>) -> Element<T> {
    match rho.descriptor() {
        AlgebraDescriptor::Vector(_) => rho.clone(),
        AlgebraDescriptor::Matrix(_) => {
            let m = rho.data();
            Element::from_matrix((m + m.transpose()) * real::<T>(0.5))
        }
    }
}
