//! Kraus-operator and partial-trace machinery for the quantum-channel
//! example: the block operator `K`, the channel `eps(a) = Tr_1(K^*(a (x)
//! Id)K)`, its closed form `a_11 P1^2 + a_22 P2^2`, the stationary vector
//! of `P`, and the state `xi`.
//!
//! Tensor convention: `a (x) b` is indexed first-factor-major, so
//! `(a (x) b)_{(2i + r)(2j + s)} = a_{ij} b_{rs}` with blocks of `b`
//! scaled by entries of `a`.

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};
use nalgebra::{DMatrix, Matrix2, Matrix4, Vector2};

/// A strictly positive 2 x 2 row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix2<T: Scalar> {
    entries: Matrix2<T>,
}

impl<T: Scalar> StochasticMatrix2<T> {
    pub fn new(entries: Matrix2<T>) -> Result<Self> {
        if entries.iter().any(|&x| x <= T::zero()) {
            return Err(Error::InvalidStochasticMatrix(
                "entries must be strictly positive".into(),
            ));
        }
        let tol = real::<T>(1e-14);
        for i in 0..2 {
            let row_sum = entries[(i, 0)] + entries[(i, 1)];
            if (row_sum - T::one()).abs() > tol {
                return Err(Error::InvalidStochasticMatrix(format!(
                    "row {i} sums to {} instead of 1",
                    row_sum.as_f64()
                )));
            }
        }
        Ok(StochasticMatrix2 { entries })
    }

    pub fn entries(&self) -> &Matrix2<T> {
        &self.entries
    }

    /// `P1 = diag(sqrt(p11), sqrt(p21))`.
    pub fn p1(&self) -> Matrix2<T> {
        Matrix2::from_diagonal(&Vector2::new(
            self.entries[(0, 0)].sqrt(),
            self.entries[(1, 0)].sqrt(),
        ))
    }

    /// `P2 = diag(sqrt(p12), sqrt(p22))`.
    pub fn p2(&self) -> Matrix2<T> {
        Matrix2::from_diagonal(&Vector2::new(
            self.entries[(0, 1)].sqrt(),
            self.entries[(1, 1)].sqrt(),
        ))
    }

    /// The unique stationary probability vector, `pi P = pi`, from the
    /// explicit 2 x 2 solution `pi = (p21, p12) / (p12 + p21)`.
    pub fn stationary_vector(&self) -> Vector2<T> {
        let denom = self.entries[(0, 1)] + self.entries[(1, 0)];
        Vector2::new(self.entries[(1, 0)] / denom, self.entries[(0, 1)] / denom)
    }
}

/// `K = E11 (x) P1 + E22 (x) P2 = diag-block(P1, P2)`; symmetric because
/// the blocks are diagonal.
pub fn build_k<T: Scalar>(p: &StochasticMatrix2<T>) -> Matrix4<T> {
    let mut k = Matrix4::zeros();
    k.view_mut((0, 0), (2, 2)).copy_from(&p.p1());
    k.view_mut((2, 2), (2, 2)).copy_from(&p.p2());
    k
}

/// Kronecker product in the first-factor-major convention.
pub fn kron2<T: Scalar>(a: &Matrix2<T>, b: &Matrix2<T>) -> Matrix4<T> {
    let mut out = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            out.view_mut((2 * i, 2 * j), (2, 2)).copy_from(&(b * a[(i, j)]));
        }
    }
    out
}

/// Partial trace over the first tensor factor:
/// `(Tr_1 T)_{ij} = T_{ij} + T_{(i+2)(j+2)}`.
pub fn partial_trace_first<T: Scalar>(t: &Matrix4<T>) -> Matrix2<T> {
    Matrix2::from_fn(|i, j| t[(i, j)] + t[(i + 2, j + 2)])
}

/// The channel through the dilation route:
/// `eps(a) = Tr_1(K^*(a (x) Id) K)`.
pub fn epsilon_via_partial_trace<T: Scalar>(
    a: &Matrix2<T>,
    p: &StochasticMatrix2<T>,
) -> Matrix2<T> {
    let k = build_k(p);
    let lifted = kron2(a, &Matrix2::identity());
    partial_trace_first(&(k.transpose() * lifted * k))
}

/// The channel in closed form: `eps(a) = a_11 P1^2 + a_22 P2^2`.
pub fn epsilon_closed_form<T: Scalar>(a: &Matrix2<T>, p: &StochasticMatrix2<T>) -> Matrix2<T> {
    let p1 = p.p1();
    let p2 = p.p2();
    p1 * p1 * a[(0, 0)] + p2 * p2 * a[(1, 1)]
}

/// `xi(a) = a_11 pi_1 + a_22 pi_2`.
pub fn xi<T: Scalar>(a: &Matrix2<T>, pi: &Vector2<T>) -> T {
    a[(0, 0)] * pi[0] + a[(1, 1)] * pi[1]
}

/// Max entrywise distance between the two computation routes for
/// `eps(a)`; the runtime check behind the closed form.
pub fn epsilon_route_defect<T: Scalar>(a: &Matrix2<T>, p: &StochasticMatrix2<T>) -> T {
    let diff = epsilon_via_partial_trace(a, p) - epsilon_closed_form(a, p);
    diff.abs().max()
}

/// Convenience converter for callers holding dynamic matrices.
pub fn stochastic_from_dmatrix<T: Scalar>(m: &DMatrix<T>) -> Result<StochasticMatrix2<T>> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::InvalidStochasticMatrix(format!(
            "expected 2 x 2, got {} x {}",
            m.nrows(),
            m.ncols()
        )));
    }
    StochasticMatrix2::new(Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seeded_p(rng: &mut ChaCha8Rng) -> StochasticMatrix2<f64> {
        let a = 0.05 + 0.9 * rng.gen::<f64>();
        let b = 0.05 + 0.9 * rng.gen::<f64>();
        StochasticMatrix2::new(matrix![a, 1.0 - a; b, 1.0 - b]).unwrap()
    }

    fn seeded_symmetric(rng: &mut ChaCha8Rng) -> Matrix2<f64> {
        let x = rng.gen::<f64>() * 2.0 - 1.0;
        let y = rng.gen::<f64>() * 2.0 - 1.0;
        let z = rng.gen::<f64>() * 2.0 - 1.0;
        matrix![x, z; z, y]
    }

    #[test]
    fn k_structure() {
        let uniform = StochasticMatrix2::new(matrix![0.5, 0.5; 0.5, 0.5]).unwrap();
        let k = build_k(&uniform);
        let s = 0.5f64.sqrt();
        assert_eq!(k, Matrix4::from_diagonal(&nalgebra::vector![s, s, s, s]));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = seeded_p(&mut rng);
            let k = build_k(&p);
            // K = K*.
            assert!((k - k.transpose()).abs().max() < 1e-14);
            // K^2 has diagonal blocks P1^2, P2^2.
            let k2 = k * k;
            let p1 = p.p1();
            let p2 = p.p2();
            assert!(
                (k2.view((0, 0), (2, 2)) - p1 * p1).abs().max() < 1e-14
            );
            assert!(
                (k2.view((2, 2), (2, 2)) - p2 * p2).abs().max() < 1e-14
            );
        }
    }

    #[test]
    fn partial_trace_identities() {
        assert_eq!(partial_trace_first(&Matrix4::identity()), Matrix2::identity() * 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = seeded_symmetric(&mut rng);
            let b = seeded_symmetric(&mut rng);
            // Tr_1(A (x) B) = tr(A) B.
            let t = kron2(&a, &b);
            assert!((partial_trace_first(&t) - b * a.trace()).abs().max() < 1e-14);
            // Trace preservation.
            assert!((partial_trace_first(&t).trace() - t.trace()).abs() < 1e-14);
        }
    }

    #[test]
    fn epsilon_two_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = seeded_p(&mut rng);
            let a = seeded_symmetric(&mut rng);
            assert!(epsilon_route_defect(&a, &p) < 1e-12);
        }
    }

    #[test]
    fn epsilon_is_unital_and_selects_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let p = seeded_p(&mut rng);
            let id = Matrix2::identity();
            assert!((epsilon_closed_form(&id, &p) - id).abs().max() < 1e-14);
            let e11 = matrix![1.0, 0.0; 0.0, 0.0];
            let p1 = p.p1();
            assert!((epsilon_closed_form(&e11, &p) - p1 * p1).abs().max() < 1e-14);
        }
    }

    #[test]
    fn stationary_vector_values() {
        let uniform = StochasticMatrix2::<f64>::new(matrix![0.5, 0.5; 0.5, 0.5]).unwrap();
        let pi = uniform.stationary_vector();
        assert!((pi[0] - 0.5).abs() < 1e-15 && (pi[1] - 0.5).abs() < 1e-15);

        let p = StochasticMatrix2::<f64>::new(matrix![0.9, 0.1; 0.2, 0.8]).unwrap();
        let pi = p.stationary_vector();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p = seeded_p(&mut rng);
            let pi = p.stationary_vector();
            let defect = (pi.transpose() * p.entries() - pi.transpose()).abs().max();
            assert!(defect < 1e-14);
            assert!((pi[0] + pi[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn xi_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let p = seeded_p(&mut rng);
            let pi = p.stationary_vector();
            let a = seeded_symmetric(&mut rng);
            assert!((xi(&Matrix2::identity(), &pi) - 1.0).abs() < 1e-14);
            let lhs = xi(&epsilon_closed_form(&a, &p), &pi);
            assert!((lhs - xi(&a, &pi)).abs() < 1e-12);
        }
    }

    #[test]
    fn epsilon_improves_positivity_on_projectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let p = seeded_p(&mut rng);
            let theta = rng.gen::<f64>() * std::f64::consts::PI;
            let v = nalgebra::vector![theta.cos(), theta.sin()];
            let proj = v * v.transpose();
            let image = epsilon_closed_form(&proj, &p);
            let min_entry = p.entries().iter().fold(f64::INFINITY, |m, &x| m.min(x));
            let bound = min_entry * (proj[(0, 0)] + proj[(1, 1)]) / 2.0;
            // Diagonal image: the min eigenvalue is the min diagonal entry.
            let min_eig = image[(0, 0)].min(image[(1, 1)]);
            assert!(min_eig >= bound - 1e-14, "{min_eig} < {bound}");
        }
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        assert!(StochasticMatrix2::new(matrix![0.5, 0.6; 0.5, 0.5]).is_err());
        assert!(StochasticMatrix2::new(matrix![1.0, 0.0; 0.5, 0.5]).is_err());
        assert!(StochasticMatrix2::<f64>::new(matrix![0.5, 0.5; 0.5, 0.5]).is_ok());
    }

    #[test]
    fn transfer_level_closure_with_kraus_eigenstate() {
        // The channel's xi integrated against the reversed Markov weights
        // is exactly the transfer-operator eigenstate of the kraus_split
        // potential (Eq. gg13); cross-check through both pipelines.
        use crate::eigenstate::Eigenstate;
        use crate::potential::Potential;
        let entries = matrix![0.3, 0.7; 0.6, 0.4];
        let p = StochasticMatrix2::new(entries).unwrap();
        let phi = Potential::<f64>::make_kraus_split(
            DMatrix::from_fn(2, 2, |i, j| entries[(i, j)]),
        )
        .unwrap();
        let eta = Eigenstate::extract(&phi, 1).unwrap();
        let pi = p.stationary_vector();
        // Depth-1 weights are pi_i E_ii.
        assert!((eta.weights()[0].data()[(0, 0)] - pi[0]).abs() < 1e-12);
        assert!((eta.weights()[1].data()[(1, 1)] - pi[1]).abs() < 1e-12);
    }
}
