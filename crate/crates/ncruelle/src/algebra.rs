//! Finite-dimensional real C*-algebra backend: elements of `M_d(R)` or
//! `R^N`, positivity tests, normalized trace, spectral logarithm, and linear
//! maps on the algebra.
//!
//! The algebra norm is the C*-norm: largest singular value for the matrix
//! kind, max-abs for the vector kind. Linear maps act on vectorized elements
//! (column-major for the matrix kind).

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Which algebra the elements live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlgebraDescriptor {
    /// `M_d(R)`, real dimension `d^2`.
    Matrix(usize),
    /// `R^N` with coordinatewise product, real dimension `N`.
    Vector(usize),
}

impl AlgebraDescriptor {
    /// Real dimension of the algebra as a vector space.
    pub fn dim(&self) -> usize {
        match *self {
            AlgebraDescriptor::Matrix(d) => d * d,
            AlgebraDescriptor::Vector(n) => n,
        }
    }

    /// Side length: `d` for the matrix kind, `N` for the vector kind.
    pub fn side(&self) -> usize {
        match *self {
            AlgebraDescriptor::Matrix(d) => d,
            AlgebraDescriptor::Vector(n) => n,
        }
    }
}

/// An element of the algebra. Matrix-kind data is a `d x d` real matrix,
/// vector-kind data is a `N x 1` column.
#[derive(Debug, Clone, PartialEq)]
pub struct Element<T: Scalar> {
    descriptor: AlgebraDescriptor,
    data: DMatrix<T>,
}

impl<T: Scalar> Element<T> {
    pub fn from_matrix(m: DMatrix<T>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix elements must be square");
        Element {
            descriptor: AlgebraDescriptor::Matrix(m.nrows()),
            data: m,
        }
    }

    pub fn from_vector(v: DVector<T>) -> Self {
        let n = v.len();
        Element {
            descriptor: AlgebraDescriptor::Vector(n),
            data: DMatrix::from_column_slice(n, 1, v.as_slice()),
        }
    }

    /// The multiplicative unit: identity matrix or all-ones vector.
    pub fn identity(desc: AlgebraDescriptor) -> Self {
        match desc {
            AlgebraDescriptor::Matrix(d) => Element::from_matrix(DMatrix::identity(d, d)),
            AlgebraDescriptor::Vector(n) => {
                Element::from_vector(DVector::from_element(n, T::one()))
            }
        }
    }

    pub fn zero(desc: AlgebraDescriptor) -> Self {
        match desc {
            AlgebraDescriptor::Matrix(d) => Element::from_matrix(DMatrix::zeros(d, d)),
            AlgebraDescriptor::Vector(n) => Element::from_vector(DVector::zeros(n)),
        }
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        self.descriptor
    }

    /// Raw data: `d x d` for the matrix kind, `N x 1` for the vector kind.
    pub fn data(&self) -> &DMatrix<T> {
        &self.data
    }

    /// The element as a flat column in the fixed vectorization order.
    pub fn vectorize(&self) -> DVector<T> {
        DVector::from_column_slice(self.data.as_slice())
    }

    /// Inverse of [`vectorize`](Self::vectorize).
    pub fn devectorize(desc: AlgebraDescriptor, v: &DVector<T>) -> Self {
        assert_eq!(v.len(), desc.dim());
        match desc {
            AlgebraDescriptor::Matrix(d) => {
                Element::from_matrix(DMatrix::from_column_slice(d, d, v.as_slice()))
            }
            AlgebraDescriptor::Vector(n) => {
                Element::from_vector(DVector::from_column_slice(&v.as_slice()[..n]))
            }
        }
    }

    pub fn add(&self, other: &Element<T>) -> Element<T> {
        assert_eq!(self.descriptor, other.descriptor);
        Element {
            descriptor: self.descriptor,
            data: &self.data + &other.data,
        }
    }

    pub fn sub(&self, other: &Element<T>) -> Element<T> {
        assert_eq!(self.descriptor, other.descriptor);
        Element {
            descriptor: self.descriptor,
            data: &self.data - &other.data,
        }
    }

    pub fn scale(&self, c: T) -> Element<T> {
        Element {
            descriptor: self.descriptor,
            data: &self.data * c,
        }
    }

    /// The C*-norm: largest singular value (matrix kind), max-abs (vector).
    pub fn norm(&self) -> T {
        match self.descriptor {
            AlgebraDescriptor::Matrix(_) => spectral_norm(&self.data),
            AlgebraDescriptor::Vector(_) => self
                .data
                .iter()
                .fold(T::zero(), |acc, &x| acc.max(x.abs())),
        }
    }

    /// `(1/d) tr` for the matrix kind; arithmetic coordinate mean for the
    /// vector kind. Normalized so the identity has trace 1.
    pub fn normalized_trace(&self) -> T {
        match self.descriptor {
            AlgebraDescriptor::Matrix(d) => self.data.trace() / real::<T>(d as f64),
            AlgebraDescriptor::Vector(n) => self.data.sum() / real::<T>(n as f64),
        }
    }

    /// Eigenvalues of the symmetrized element (matrix kind) or the
    /// coordinates (vector kind), ascending.
    pub fn spectrum_ascending(&self) -> Vec<T> {
        let mut eigs = match self.descriptor {
            AlgebraDescriptor::Matrix(_) => {
                let sym = (&self.data + self.data.transpose()) * real::<T>(0.5);
                sym.symmetric_eigen().eigenvalues.iter().copied().collect::<Vec<_>>()
            }
            AlgebraDescriptor::Vector(_) => self.data.iter().copied().collect(),
        };
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        eigs
    }

    /// Distance from being symmetric; zero for the vector kind.
    pub fn asymmetry(&self) -> T {
        match self.descriptor {
            AlgebraDescriptor::Matrix(_) => {
                let skew = (&self.data - self.data.transpose()) * real::<T>(0.5);
                spectral_norm(&skew)
            }
            AlgebraDescriptor::Vector(_) => T::zero(),
        }
    }

    /// Positive within `tol`: symmetric within `tol` and min eigenvalue
    /// `>= -tol` (matrix kind); all coordinates `>= -tol` (vector kind).
    pub fn is_positive(&self, tol: T) -> bool {
        if self.asymmetry() > tol {
            return false;
        }
        self.spectrum_ascending()[0] >= -tol
    }

    /// Strictly positive: `a >= eps * identity`.
    pub fn is_strictly_positive(&self, eps: T) -> bool {
        if self.asymmetry() > eps {
            return false;
        }
        self.spectrum_ascending()[0] >= eps
    }

    /// Spectral logarithm of a strictly positive element. Errors naming the
    /// offending eigenvalue when the element is not `>= eps * identity`.
    pub fn log_positive(&self, eps: T) -> Result<Element<T>> {
        match self.descriptor {
            AlgebraDescriptor::Matrix(_) => {
                let sym = (&self.data + self.data.transpose()) * real::<T>(0.5);
                let eig = sym.symmetric_eigen();
                let min = eig
                    .eigenvalues
                    .iter()
                    .fold(real::<T>(f64::INFINITY), |acc, &x| acc.min(x));
                if min < eps || self.asymmetry() > eps.max(real::<T>(1e-9)) {
                    return Err(Error::NotStrictlyPositive {
                        min_eigenvalue: min.as_f64(),
                        eps: eps.as_f64(),
                    });
                }
                let logged = DVector::from_iterator(
                    eig.eigenvalues.len(),
                    eig.eigenvalues.iter().map(|&l| l.ln()),
                );
                let q = &eig.eigenvectors;
                let m = q * DMatrix::from_diagonal(&logged) * q.transpose();
                Ok(Element::from_matrix(m))
            }
            AlgebraDescriptor::Vector(_) => {
                let min = self
                    .data
                    .iter()
                    .fold(real::<T>(f64::INFINITY), |acc, &x| acc.min(x));
                if min < eps {
                    return Err(Error::NotStrictlyPositive {
                        min_eigenvalue: min.as_f64(),
                        eps: eps.as_f64(),
                    });
                }
                Ok(Element {
                    descriptor: self.descriptor,
                    data: self.data.map(|x| x.ln()),
                })
            }
        }
    }

    /// Spectral exponential; inverse of [`log_positive`](Self::log_positive)
    /// on symmetric elements.
    pub fn exp_symmetric(&self) -> Element<T> {
        match self.descriptor {
            AlgebraDescriptor::Matrix(_) => {
                let sym = (&self.data + self.data.transpose()) * real::<T>(0.5);
                let eig = sym.symmetric_eigen();
                let exped = DVector::from_iterator(
                    eig.eigenvalues.len(),
                    eig.eigenvalues.iter().map(|&l| l.exp()),
                );
                let q = &eig.eigenvectors;
                Element::from_matrix(q * DMatrix::from_diagonal(&exped) * q.transpose())
            }
            AlgebraDescriptor::Vector(_) => Element {
                descriptor: self.descriptor,
                data: self.data.map(|x| x.exp()),
            },
        }
    }
}

/// Largest singular value.
pub fn spectral_norm<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.iter().all(|&x| x == T::zero()) {
        return T::zero();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(T::zero(), |acc, &s| acc.max(s))
}

/// Verdict of the positivity-improving check. Finite sampling cannot
/// certify truth for matrix algebras, so the positive verdict is
/// `ProbablyTrue` there; for the vector kind the entrywise criterion is
/// exact in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PositivityVerdict {
    CertifiedTrue,
    CertifiedFalse,
    ProbablyTrue,
}

/// A concrete linear operator on algebra elements, stored as its
/// `dim x dim` action on vectorized elements.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap<T: Scalar> {
    descriptor: AlgebraDescriptor,
    action: DMatrix<T>,
}

impl<T: Scalar> LinearMap<T> {
    pub fn from_action(descriptor: AlgebraDescriptor, action: DMatrix<T>) -> Self {
        assert_eq!(action.nrows(), descriptor.dim());
        assert_eq!(action.ncols(), descriptor.dim());
        LinearMap { descriptor, action }
    }

    /// Builds a map by applying `f` to each vectorization basis element.
    pub fn from_fn(
        descriptor: AlgebraDescriptor,
        mut f: impl FnMut(&Element<T>) -> Element<T>,
    ) -> Self {
        let dim = descriptor.dim();
        let mut action = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut basis = DVector::zeros(dim);
            basis[j] = T::one();
            let image = f(&Element::devectorize(descriptor, &basis));
            action.set_column(j, &image.vectorize());
        }
        LinearMap { descriptor, action }
    }

    pub fn identity(descriptor: AlgebraDescriptor) -> Self {
        let dim = descriptor.dim();
        LinearMap {
            descriptor,
            action: DMatrix::identity(dim, dim),
        }
    }

    pub fn zero(descriptor: AlgebraDescriptor) -> Self {
        let dim = descriptor.dim();
        LinearMap {
            descriptor,
            action: DMatrix::zeros(dim, dim),
        }
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        self.descriptor
    }

    pub fn action(&self) -> &DMatrix<T> {
        &self.action
    }

    pub fn apply(&self, a: &Element<T>) -> Result<Element<T>> {
        if a.descriptor() != self.descriptor {
            return Err(Error::DescriptorMismatch(format!(
                "map on {:?} applied to element of {:?}",
                self.descriptor,
                a.descriptor()
            )));
        }
        Ok(Element::devectorize(
            self.descriptor,
            &(&self.action * a.vectorize()),
        ))
    }

    pub fn add(&self, other: &LinearMap<T>) -> LinearMap<T> {
        assert_eq!(self.descriptor, other.descriptor);
        LinearMap {
            descriptor: self.descriptor,
            action: &self.action + &other.action,
        }
    }

    pub fn sub(&self, other: &LinearMap<T>) -> LinearMap<T> {
        assert_eq!(self.descriptor, other.descriptor);
        LinearMap {
            descriptor: self.descriptor,
            action: &self.action - &other.action,
        }
    }

    pub fn scale(&self, c: T) -> LinearMap<T> {
        LinearMap {
            descriptor: self.descriptor,
            action: &self.action * c,
        }
    }

    pub fn compose(&self, other: &LinearMap<T>) -> LinearMap<T> {
        assert_eq!(self.descriptor, other.descriptor);
        LinearMap {
            descriptor: self.descriptor,
            action: &self.action * &other.action,
        }
    }

    /// Operator norm with respect to the algebra norm.
    ///
    /// Vector kind: exact (max absolute row sum, the `l^inf`-induced norm).
    /// Matrix kind: the unit ball of the spectral norm is the convex hull
    /// of the orthogonal group, so the norm is the max of `|L(Q)|` over
    /// orthogonal `Q`. For `d <= 2` the orthogonal group is swept by a fine
    /// one-parameter grid with local refinement (exact to ~1e-10); for
    /// larger `d` structured probes plus seeded random orthogonals give a
    /// lower bound that is exact on the built-in potential families.
    pub fn operator_norm(&self) -> T {
        match self.descriptor {
            AlgebraDescriptor::Vector(n) => {
                let mut best = T::zero();
                for i in 0..n {
                    let row_sum = (0..n).fold(T::zero(), |acc, j| acc + self.action[(i, j)].abs());
                    best = best.max(row_sum);
                }
                best
            }
            AlgebraDescriptor::Matrix(1) => self.action[(0, 0)].abs(),
            AlgebraDescriptor::Matrix(2) => self.operator_norm_d2(),
            AlgebraDescriptor::Matrix(d) => self.operator_norm_probed(d),
        }
    }

    fn image_norm(&self, q: &DMatrix<T>) -> T {
        let e = Element::from_matrix(q.clone());
        self.apply(&e).expect("matching descriptor").norm()
    }

    fn operator_norm_d2(&self) -> T {
        let objective = |t: f64, reflect: bool| -> T {
            let (c, s) = (real::<T>(t.cos()), real::<T>(t.sin()));
            let q = if reflect {
                DMatrix::from_row_slice(2, 2, &[c, s, s, -c])
            } else {
                DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
            };
            self.image_norm(&q)
        };
        let mut best = T::zero();
        for reflect in [false, true] {
            let steps = 720usize;
            let mut best_t = 0.0f64;
            let mut best_v = real::<T>(-1.0);
            for i in 0..steps {
                let t = 2.0 * std::f64::consts::PI * (i as f64) / (steps as f64);
                let v = objective(t, reflect);
                if v > best_v {
                    best_v = v;
                    best_t = t;
                }
            }
            // Golden-section refinement around the best grid point.
            let mut lo = best_t - 2.0 * std::f64::consts::PI / steps as f64;
            let mut hi = best_t + 2.0 * std::f64::consts::PI / steps as f64;
            let phi = (5.0f64.sqrt() - 1.0) / 2.0;
            for _ in 0..80 {
                let m1 = hi - phi * (hi - lo);
                let m2 = lo + phi * (hi - lo);
                if objective(m1, reflect) < objective(m2, reflect) {
                    lo = m1;
                } else {
                    hi = m2;
                }
            }
            best = best.max(objective(0.5 * (lo + hi), reflect)).max(best_v);
        }
        best
    }

    fn operator_norm_probed(&self, d: usize) -> T {
        use rand::SeedableRng;
        let mut best = T::zero();
        // Diagonal sign patterns (includes the identity).
        for mask in 0..(1usize << d) {
            let q = DMatrix::from_fn(d, d, |i, j| {
                if i != j {
                    T::zero()
                } else if (mask >> i) & 1 == 1 {
                    -T::one()
                } else {
                    T::one()
                }
            });
            best = best.max(self.image_norm(&q));
        }
        // Seeded random orthogonals via QR.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6f70_6e6f_726d);
        for _ in 0..256 {
            let g = DMatrix::from_fn(d, d, |_, _| {
                real::<T>(rng.sample::<f64, _>(rand_distr_standard_normal()))
            });
            let qr = g.qr();
            best = best.max(self.image_norm(&qr.q()));
        }
        best
    }

    /// Three-valued positivity-improving check, see [`PositivityVerdict`].
    pub fn is_positivity_improving(
        &self,
        trials: usize,
        eps: T,
        seed: u64,
    ) -> PositivityVerdict {
        use rand::SeedableRng;
        match self.descriptor {
            AlgebraDescriptor::Vector(_) => {
                if self.action.iter().all(|&x| x > T::zero()) {
                    PositivityVerdict::CertifiedTrue
                } else {
                    PositivityVerdict::CertifiedFalse
                }
            }
            AlgebraDescriptor::Matrix(d) => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..trials.max(1) {
                    let v = random_unit_vector::<T>(d, &mut rng);
                    let proj = Element::from_matrix(&v * v.transpose());
                    let image = self.apply(&proj).expect("matching descriptor");
                    let spectrum = image.spectrum_ascending();
                    let trace_norm = spectrum
                        .iter()
                        .fold(T::zero(), |acc, &l| acc + l.abs());
                    if spectrum[0] < eps * trace_norm {
                        return PositivityVerdict::CertifiedFalse;
                    }
                }
                PositivityVerdict::ProbablyTrue
            }
        }
    }
}

fn rand_distr_standard_normal() -> rand::distributions::Standard {
    // Box-Muller would be cleaner; uniform samples are enough for probing.
    rand::distributions::Standard
}

/// A uniformly random unit vector, for projector sampling.
pub fn random_unit_vector<T: Scalar>(d: usize, rng: &mut impl Rng) -> DVector<T> {
    loop {
        let v = DVector::from_fn(d, |_, _| real::<T>(rng.gen::<f64>() * 2.0 - 1.0));
        let n = v.norm();
        if n > real::<T>(1e-3) {
            return v / n;
        }
    }
}

/// A random element with entries uniform in `[-1, 1]`.
pub fn random_element<T: Scalar>(
    desc: AlgebraDescriptor,
    rng: &mut impl Rng,
) -> Element<T> {
    match desc {
        AlgebraDescriptor::Matrix(d) => Element::from_matrix(DMatrix::from_fn(d, d, |_, _| {
            real::<T>(rng.gen::<f64>() * 2.0 - 1.0)
        })),
        AlgebraDescriptor::Vector(n) => Element::from_vector(DVector::from_fn(n, |_, _| {
            real::<T>(rng.gen::<f64>() * 2.0 - 1.0)
        })),
    }
}

/// A random symmetric element (matrix kind) or plain random (vector kind).
pub fn random_symmetric<T: Scalar>(
    desc: AlgebraDescriptor,
    rng: &mut impl Rng,
) -> Element<T> {
    let a = random_element(desc, rng);
    match desc {
        AlgebraDescriptor::Matrix(_) => {
            let sym = (a.data() + a.data().transpose()) * real::<T>(0.5);
            Element::from_matrix(sym)
        }
        AlgebraDescriptor::Vector(_) => a,
    }
}

/// A random positive semidefinite element `b^T b` (matrix kind) or a
/// nonnegative vector (vector kind).
pub fn random_psd<T: Scalar>(desc: AlgebraDescriptor, rng: &mut impl Rng) -> Element<T> {
    match desc {
        AlgebraDescriptor::Matrix(d) => {
            let b = DMatrix::from_fn(d, d, |_, _| real::<T>(rng.gen::<f64>() * 2.0 - 1.0));
            Element::from_matrix(b.transpose() * b)
        }
        AlgebraDescriptor::Vector(n) => {
            Element::from_vector(DVector::from_fn(n, |_, _| real::<T>(rng.gen::<f64>())))
        }
    }
}

/// A random strictly positive element: PSD plus a positive multiple of the
/// identity.
pub fn random_spd<T: Scalar>(desc: AlgebraDescriptor, rng: &mut impl Rng) -> Element<T> {
    let shift = real::<T>(0.1 + rng.gen::<f64>());
    random_psd(desc, rng).add(&Element::identity(desc).scale(shift))
}
