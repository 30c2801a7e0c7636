//! Operator-valued potentials: depth-`m` tables of linear maps on the
//! algebra, the built-in families, normalization check, Jacobian, and the
//! Lipschitz seminorm.
//!
//! Only locally constant potentials are representable. A genuinely
//! Lipschitz potential must be truncated by the caller; the truncation
//! error is bounded by `|phi|_theta * theta^m`.

use crate::algebra::{AlgebraDescriptor, Element, LinearMap, PositivityVerdict};
use crate::cylfun::CylinderFunction;
use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};
use crate::sft::{TransitionMatrix, Word};
use nalgebra::DMatrix;

/// Positivity-improving evidence attached to a potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    /// Structurally positivity-improving (strictly positive trace-type
    /// factor, depolarizing mix, or entrywise-positive vector table).
    AnalyticPi,
    /// Only the sampled three-valued check is available.
    Sampled(PositivityVerdict),
    /// No pointwise certificate; the transfer operator may still be
    /// eventually positivity-improving.
    None,
}

/// Which built-in family produced the potential, with the data needed by
/// the closed-form eigenstates.
#[derive(Debug, Clone)]
pub enum Family<T: Scalar> {
    /// `phi_w(a) = tr^(a) P(w)` with strictly positive factors.
    TraceType,
    /// Constant `a -> (1/k)((1-p) a + p tr^(a) Id)`.
    Depolarizing { p: T },
    /// Branch-split Kraus potential from a row-stochastic `P`.
    KrausSplit { p_matrix: DMatrix<T> },
    /// Entrywise-positive tables acting on `R^N`.
    VectorTable,
    /// Anything supplied directly.
    Custom,
}

/// A depth-`m` table of linear maps on the algebra: the locally constant
/// potential the transfer operator is built from.
#[derive(Debug, Clone)]
pub struct Potential<T: Scalar> {
    descriptor: AlgebraDescriptor,
    shift: TransitionMatrix,
    depth: usize,
    table: Vec<LinearMap<T>>,
    certificate: Certificate,
    family: Family<T>,
    /// Trace-type matrix factors, in word order, when applicable.
    factors: Option<Vec<Element<T>>>,
}

impl<T: Scalar> Potential<T> {
    fn build(
        descriptor: AlgebraDescriptor,
        shift: TransitionMatrix,
        depth: usize,
        table: Vec<LinearMap<T>>,
        certificate: Certificate,
        family: Family<T>,
        factors: Option<Vec<Element<T>>>,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidPotential(
                "potential depth must be at least 1".into(),
            ));
        }
        let expected = shift.word_count(depth);
        if table.len() != expected {
            return Err(Error::InvalidPotential(format!(
                "expected {expected} maps for depth {depth}, got {}",
                table.len()
            )));
        }
        for map in &table {
            if map.descriptor() != descriptor {
                return Err(Error::DescriptorMismatch(
                    "potential map has wrong descriptor".into(),
                ));
            }
        }
        Ok(Potential {
            descriptor,
            shift,
            depth,
            table,
            certificate,
            family,
            factors,
        })
    }

    /// Trace-type potential `phi_w(a) = tr^(a) P(w)` from factors in
    /// lexicographic word order. Every factor must be strictly positive.
    pub fn make_trace_type(
        shift: TransitionMatrix,
        depth: usize,
        factors: Vec<Element<T>>,
    ) -> Result<Self> {
        let eps = real::<T>(1e-10);
        let words = shift.allowed_words(depth)?;
        if factors.len() != words.len() {
            return Err(Error::InvalidPotential(format!(
                "expected {} factors, got {}",
                words.len(),
                factors.len()
            )));
        }
        let descriptor = factors
            .first()
            .map(|f| f.descriptor())
            .ok_or_else(|| Error::InvalidPotential("empty factor table".into()))?;
        for (w, f) in words.iter().zip(factors.iter()) {
            if !f.is_strictly_positive(eps) {
                return Err(Error::InvalidPotential(format!(
                    "trace-type factor at word {w} is not strictly positive"
                )));
            }
        }
        let table = factors
            .iter()
            .map(|p| {
                let p = p.clone();
                LinearMap::from_fn(descriptor, move |a| p.scale(a.normalized_trace()))
            })
            .collect();
        Potential::build(
            descriptor,
            shift,
            depth,
            table,
            Certificate::AnalyticPi,
            Family::TraceType,
            Some(factors),
        )
    }

    /// The depolarizing family: constant depth-1 potential
    /// `a -> (1/k)((1-p) a + p tr^(a) Id)` on the full `k`-shift.
    pub fn make_depolarizing(p: T, k: usize, d: usize) -> Result<Self> {
        let p_f = p.as_f64();
        if !(p_f > 0.0 && p_f <= 1.0) {
            return Err(Error::InvalidPotential(format!(
                "depolarizing parameter must lie in (0,1], got {p_f}"
            )));
        }
        let descriptor = AlgebraDescriptor::Matrix(d);
        let shift = TransitionMatrix::full_shift(k);
        let inv_k = T::one() / real::<T>(k as f64);
        let map = LinearMap::from_fn(descriptor, move |a: &Element<T>| {
            a.scale(T::one() - p)
                .add(&Element::identity(descriptor).scale(p * a.normalized_trace()))
                .scale(inv_k)
        });
        let table = vec![map; k];
        Potential::build(
            descriptor,
            shift,
            1,
            table,
            Certificate::AnalyticPi,
            Family::Depolarizing { p },
            None,
        )
    }

    /// The branch-split Kraus potential on the full 2-shift:
    /// `phi_1(a) = a_11 P1^2`, `phi_2(a) = a_22 P2^2`, with
    /// `P1 = diag(sqrt(p11), sqrt(p21))` and `P2 = diag(sqrt(p12), sqrt(p22))`.
    ///
    /// The individual branch maps are positive but not positivity-improving,
    /// so no certificate is attached; the transfer operator is still
    /// eventually positivity-improving.
    pub fn make_kraus_split(p_matrix: DMatrix<T>) -> Result<Self> {
        validate_stochastic_2x2(&p_matrix)?;
        let descriptor = AlgebraDescriptor::Matrix(2);
        let shift = TransitionMatrix::full_shift(2);
        let p1_sq = DMatrix::from_diagonal(&nalgebra::dvector![
            p_matrix[(0, 0)],
            p_matrix[(1, 0)]
        ]);
        let p2_sq = DMatrix::from_diagonal(&nalgebra::dvector![
            p_matrix[(0, 1)],
            p_matrix[(1, 1)]
        ]);
        let branch = |factor: DMatrix<T>, entry: usize| {
            LinearMap::from_fn(descriptor, move |a: &Element<T>| {
                Element::from_matrix(&factor * a.data()[(entry, entry)])
            })
        };
        let table = vec![branch(p1_sq, 0), branch(p2_sq, 1)];
        Potential::build(
            descriptor,
            shift,
            1,
            table,
            Certificate::None,
            Family::KrausSplit { p_matrix },
            None,
        )
    }

    /// Vector-kind potential from entrywise-positive `N x N` tables in
    /// lexicographic word order.
    pub fn make_vector_table(
        shift: TransitionMatrix,
        depth: usize,
        tables: Vec<DMatrix<T>>,
    ) -> Result<Self> {
        let words = shift.allowed_words(depth)?;
        if tables.len() != words.len() {
            return Err(Error::InvalidPotential(format!(
                "expected {} tables, got {}",
                words.len(),
                tables.len()
            )));
        }
        let n = tables
            .first()
            .map(|t| t.nrows())
            .ok_or_else(|| Error::InvalidPotential("empty vector table".into()))?;
        let descriptor = AlgebraDescriptor::Vector(n);
        for (w, t) in words.iter().zip(tables.iter()) {
            if t.nrows() != n || t.ncols() != n {
                return Err(Error::InvalidPotential(format!(
                    "table at word {w} is not {n} x {n}"
                )));
            }
            if t.iter().any(|&x| x <= T::zero()) {
                return Err(Error::InvalidPotential(format!(
                    "table at word {w} has a nonpositive entry"
                )));
            }
        }
        let table = tables
            .into_iter()
            .map(|t| LinearMap::from_action(descriptor, t))
            .collect();
        Potential::build(
            descriptor,
            shift,
            depth,
            table,
            Certificate::AnalyticPi,
            Family::VectorTable,
            None,
        )
    }

    /// The constant vector potential `(1/(kN)) J` (all-ones `J`).
    pub fn make_vector_uniform(k: usize, n: usize) -> Result<Self> {
        let shift = TransitionMatrix::full_shift(k);
        let entry = T::one() / real::<T>((k * n) as f64);
        let table = vec![DMatrix::from_element(n, n, entry); k];
        Potential::make_vector_table(shift, 1, table)
    }

    /// The constant vector potential `(1/k)((p/N) J + (1-p) Id)`.
    pub fn make_vector_interpolated(p: T, k: usize, n: usize) -> Result<Self> {
        let p_f = p.as_f64();
        if !(p_f > 0.0 && p_f < 1.0) {
            return Err(Error::InvalidPotential(format!(
                "interpolation parameter must lie in (0,1), got {p_f}"
            )));
        }
        let shift = TransitionMatrix::full_shift(k);
        let inv_k = T::one() / real::<T>(k as f64);
        let j_entry = p / real::<T>(n as f64);
        let m = DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { T::one() - p } else { T::zero() };
            (j_entry + diag) * inv_k
        });
        Potential::make_vector_table(shift, 1, vec![m; k])
    }

    /// The first-coordinate trace-type family of matrix factors
    /// `P(1y) = diag(p, 1-p)`, `P(2y) = diag(1-p, p)` on the full 2-shift.
    pub fn make_first_coordinate(p: T) -> Result<Self> {
        let p_f = p.as_f64();
        if !(p_f > 0.0 && p_f < 1.0) {
            return Err(Error::InvalidPotential(format!(
                "first-coordinate parameter must lie in (0,1), got {p_f}"
            )));
        }
        let shift = TransitionMatrix::full_shift(2);
        let p1 = Element::from_matrix(DMatrix::from_diagonal(&nalgebra::dvector![
            p,
            T::one() - p
        ]));
        let p2 = Element::from_matrix(DMatrix::from_diagonal(&nalgebra::dvector![
            T::one() - p,
            p
        ]));
        Potential::make_trace_type(shift, 1, vec![p1, p2])
    }

    /// A potential from an explicit table of maps; the positivity verdict
    /// comes from the sampled check.
    pub fn make_custom(
        descriptor: AlgebraDescriptor,
        shift: TransitionMatrix,
        depth: usize,
        table: Vec<LinearMap<T>>,
        trials: usize,
        seed: u64,
    ) -> Result<Self> {
        let words = shift.allowed_words(depth)?;
        if table.len() != words.len() {
            let missing: Vec<String> = words
                .iter()
                .skip(table.len())
                .map(|w| w.to_string())
                .collect();
            return Err(Error::InvalidPotential(format!(
                "incomplete table: expected {} maps, got {}; missing words [{}]",
                words.len(),
                table.len(),
                missing.join(", ")
            )));
        }
        let mut verdict = PositivityVerdict::ProbablyTrue;
        for map in &table {
            if map.is_positivity_improving(trials, real::<T>(1e-10), seed)
                == PositivityVerdict::CertifiedFalse
            {
                verdict = PositivityVerdict::CertifiedFalse;
            }
        }
        if matches!(descriptor, AlgebraDescriptor::Vector(_))
            && verdict != PositivityVerdict::CertifiedFalse
        {
            verdict = PositivityVerdict::CertifiedTrue;
        }
        Potential::build(
            descriptor,
            shift,
            depth,
            table,
            Certificate::Sampled(verdict),
            Family::Custom,
            None,
        )
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

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    pub fn maps(&self) -> &[LinearMap<T>] {
        &self.table
    }

    /// Trace-type matrix factors, if this is a trace-type potential.
    pub fn trace_factors(&self) -> Option<&[Element<T>]> {
        self.factors.as_deref()
    }

    /// The map at a word of length `>= depth` (truncated to the prefix).
    pub fn map_at(&self, w: &Word) -> Result<&LinearMap<T>> {
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
        Ok(&self.table[idx])
    }

    /// Max over suffix cylinders of `|sum_i phi_{iv}(Id) - Id|` in the
    /// algebra norm; zero exactly when the potential is normalized.
    pub fn check_normalized(&self) -> T {
        let id = Element::identity(self.descriptor);
        let suffix_len = self.depth.max(2) - 1;
        let suffixes = self
            .shift
            .allowed_words(suffix_len)
            .expect("suffix enumeration within cap");
        let mut worst = T::zero();
        for v in &suffixes {
            let mut sum = Element::zero(self.descriptor);
            for i in self.shift.preimage_symbols(v.symbols()[0]) {
                let w = v.prepend(i);
                let map = self.map_at(&w).expect("allowed preimage word");
                sum = sum.add(&map.apply(&id).expect("descriptor match"));
            }
            worst = worst.max(sum.sub(&id).norm());
        }
        worst
    }

    /// The Jacobian `J(w) = phi_w(Id)` as a depth-`m` cylinder function.
    pub fn jacobian(&self) -> CylinderFunction<T> {
        let id = Element::identity(self.descriptor);
        let values = self
            .table
            .iter()
            .map(|map| map.apply(&id).expect("descriptor match"))
            .collect();
        CylinderFunction::from_values(self.descriptor, self.shift.clone(), self.depth, values)
            .expect("complete table")
    }

    /// The Lipschitz seminorm `|phi|_theta`, exact on the locally constant
    /// table: max over word pairs of the operator distance divided by
    /// `theta^(common prefix length)`.
    pub fn lipschitz_seminorm(&self, theta: T) -> Result<T> {
        let theta_f = theta.as_f64();
        if !(theta_f > 0.0 && theta_f < 1.0) {
            return Err(Error::InvalidTheta(theta_f));
        }
        let words = self.shift.allowed_words(self.depth)?;
        let mut best = T::zero();
        for (i, wi) in words.iter().enumerate() {
            for (j, wj) in words.iter().enumerate().skip(i + 1) {
                let prefix = wi.common_prefix_len(wj);
                let dist = self.table[i].sub(&self.table[j]).operator_norm();
                best = best.max(dist / theta.powi(prefix as i32));
            }
        }
        Ok(best)
    }

    /// The scalar potential `tr^ P` of a trace-type potential, as a
    /// positive table over the depth-`m` words.
    pub fn scalar_trace_potential(&self) -> Option<Vec<T>> {
        self.factors
            .as_ref()
            .map(|fs| fs.iter().map(|p| p.normalized_trace()).collect())
    }
}

fn validate_stochastic_2x2<T: Scalar>(p: &DMatrix<T>) -> Result<()> {
    if p.nrows() != 2 || p.ncols() != 2 {
        return Err(Error::InvalidStochasticMatrix(format!(
            "expected 2 x 2, got {} x {}",
            p.nrows(),
            p.ncols()
        )));
    }
    if p.iter().any(|&x| x <= T::zero()) {
        return Err(Error::InvalidStochasticMatrix(
            "entries must be strictly positive".into(),
        ));
    }
    let tol = real::<T>(1e-12);
    for i in 0..2 {
        let row_sum = p[(i, 0)] + p[(i, 1)];
        if (row_sum - T::one()).abs() > tol {
            return Err(Error::InvalidStochasticMatrix(format!(
                "row {i} sums to {} instead of 1",
                row_sum.as_f64()
            )));
        }
    }
    Ok(())
}
