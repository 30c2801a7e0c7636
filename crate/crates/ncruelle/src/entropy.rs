//! The entropy ansatz `h(phi, eta, sigma) = -eta(log J)`, the Gibbs
//! inequality for trace-type pairs, and the classical (`d = 1`)
//! reduction check.

use crate::classical::{MarkovMeasure, ScalarPotential};
use crate::cylfun::CylinderFunction;
use crate::eigenstate::Eigenstate;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::scalar::{real, Scalar};

/// The entropy of an eigenstate with respect to a potential, plus the
/// classical comparison data available for trace-type potentials.
#[derive(Debug, Clone)]
pub struct EntropyReport<T: Scalar> {
    /// `h = -eta(log J)`.
    pub h: T,
    /// `eta(log J)`; `h = -eta_log_j` by construction.
    pub eta_log_j: T,
    /// For trace-type potentials, the Kolmogorov-Sinai entropy of the
    /// classical equilibrium of `tr^ P`, which bounds `h` from below.
    pub classical_lower_bound: Option<T>,
    /// Margins of the section 5 inequality chain (currently the single
    /// Jensen margin `h - classical_lower_bound` when available).
    pub inequality_margins: Vec<T>,
}

/// The operator logarithm of the Jacobian, as a cylinder function.
pub fn log_jacobian<T: Scalar>(phi: &Potential<T>) -> Result<CylinderFunction<T>> {
    let eps = real::<T>(1e-10);
    let j = phi.jacobian();
    let values = j
        .values()
        .iter()
        .map(|v| v.log_positive(eps))
        .collect::<Result<Vec<_>>>()?;
    CylinderFunction::from_values(phi.descriptor(), phi.shift().clone(), j.depth(), values)
}

/// The classical equilibrium of the scalar potential `tr^ P` of a
/// trace-type potential.
pub fn trace_equilibrium<T: Scalar>(phi: &Potential<T>) -> Result<MarkovMeasure<T>> {
    let scalars = phi.scalar_trace_potential().ok_or_else(|| {
        Error::InvalidPotential("classical comparison requires a trace-type potential".into())
    })?;
    ScalarPotential::from_values(phi.shift().clone(), phi.depth(), scalars)?.equilibrium()
}

/// `h(phi, eta, sigma) = -eta(log J)`, with the classical lower bound
/// attached when `phi` is trace-type.
pub fn nc_entropy<T: Scalar>(
    phi: &Potential<T>,
    eta: &Eigenstate<T>,
) -> Result<EntropyReport<T>> {
    let log_j = log_jacobian(phi)?;
    let eta_log_j = eta.evaluate(&log_j)?;
    let h = -eta_log_j;
    let (classical_lower_bound, inequality_margins) =
        if phi.scalar_trace_potential().is_some() {
            let bound = trace_equilibrium(phi)?.ks_entropy();
            (Some(bound), vec![h - bound])
        } else {
            (None, Vec::new())
        };
    Ok(EntropyReport {
        h,
        eta_log_j,
        classical_lower_bound,
        inequality_margins,
    })
}

/// The left-hand side of the Gibbs inequality of Theorem (prep):
/// `h(psi, eta~, sigma) + eta~(log J_phi)` with `eta~` the eigenstate of
/// `psi`. Equals `eta~(log J_phi - log J_psi)`, hence exactly 0 at
/// `psi = phi`.
///
/// The inequality `<= 0` is guaranteed when `psi` has scalar matrix
/// factors (then it reduces to the classical Gibbs inequality plus a
/// favorable Jensen term); for general pairs the operator-Jensen excess
/// of `psi` can make the value positive.
pub fn gibbs_inequality<T: Scalar>(phi: &Potential<T>, psi: &Potential<T>) -> Result<T> {
    if phi.scalar_trace_potential().is_none() || psi.scalar_trace_potential().is_none() {
        return Err(Error::InvalidPotential(
            "the Gibbs inequality is stated for trace-type potentials".into(),
        ));
    }
    if phi.shift() != psi.shift() {
        return Err(Error::ShiftMismatch);
    }
    if phi.descriptor() != psi.descriptor() {
        return Err(Error::DescriptorMismatch(
            "potentials live on different algebras".into(),
        ));
    }
    let depth = phi.depth().max(psi.depth());
    let eta_tilde = Eigenstate::closed_form_trace_type(psi, depth)?;
    let h_psi = nc_entropy(psi, &eta_tilde)?.h;
    let log_j_phi = log_jacobian(phi)?;
    Ok(h_psi + eta_tilde.evaluate(&log_j_phi)?)
}

/// Outcome of the `d = 1` classical reduction.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalReduction<T: Scalar> {
    /// Entropy through the noncommutative pipeline (extracted eigenstate,
    /// operator logarithm).
    pub nc: T,
    /// Kolmogorov-Sinai entropy of the classical equilibrium.
    pub ks: T,
    /// `|nc - ks|`.
    pub defect: T,
    /// Fixed-point residual of the extracted eigenstate.
    pub eta_residual: T,
}

/// Runs a normalized scalar potential through the full noncommutative
/// pipeline with `d = 1` and compares against the scalar formalism.
pub fn classical_reduction_check<T: Scalar>(
    j: &ScalarPotential<T>,
) -> Result<ClassicalReduction<T>> {
    let factors = j
        .values()
        .iter()
        .map(|&x| crate::algebra::Element::from_matrix(nalgebra::dmatrix![x]))
        .collect();
    let phi = Potential::make_trace_type(j.shift().clone(), j.depth(), factors)?;
    let eta = Eigenstate::extract(&phi, j.depth().max(1))?;
    let nc = nc_entropy(&phi, &eta)?.h;
    let ks = j.equilibrium()?.ks_entropy();
    Ok(ClassicalReduction {
        nc,
        ks,
        defect: (nc - ks).abs(),
        eta_residual: eta.residual(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Element;
    use crate::sft::TransitionMatrix;
    use nalgebra::dmatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant_half() -> Potential<f64> {
        let half = Element::from_matrix(dmatrix![0.5, 0.0; 0.0, 0.5]);
        Potential::make_trace_type(
            TransitionMatrix::full_shift(2),
            1,
            vec![half.clone(), half],
        )
        .unwrap()
    }

    #[test]
    fn constant_half_family_has_entropy_log_two() {
        let phi = constant_half();
        let eta = Eigenstate::extract(&phi, 2).unwrap();
        let report = nc_entropy(&phi, &eta).unwrap();
        assert!((report.h - 2.0f64.ln()).abs() < 1e-12);
        assert!((report.h + report.eta_log_j).abs() < 1e-15);
        // d = 1 in disguise: the Jensen margin is exactly zero.
        let bound = report.classical_lower_bound.unwrap();
        assert!((report.h - bound).abs() < 1e-12);
    }

    #[test]
    fn first_coordinate_entropy_closed_form() {
        for p in [0.1, 0.25, 0.5] {
            let phi = Potential::<f64>::make_first_coordinate(p).unwrap();
            let eta = Eigenstate::extract(&phi, 2).unwrap();
            let report = nc_entropy(&phi, &eta).unwrap();
            let expected = -0.5 * (p * (1.0 - p)).ln();
            assert!(
                (report.h - expected).abs() < 1e-12,
                "p = {p}: {} vs {expected}",
                report.h
            );
            // Jensen: h >= KS entropy of the classical equilibrium
            // (Bernoulli(1/2) here, since tr^ P is constant 1/2).
            let bound = report.classical_lower_bound.unwrap();
            assert!((bound - 2.0f64.ln()).abs() < 1e-12);
            assert!(report.inequality_margins[0] >= -1e-12);
        }
        // p = 1/2 minimizes h at log 2.
        let phi = Potential::<f64>::make_first_coordinate(0.5).unwrap();
        let eta = Eigenstate::extract(&phi, 2).unwrap();
        assert!((nc_entropy(&phi, &eta).unwrap().h - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_entropy_is_log_k_for_all_p() {
        for p in [0.25, 0.7, 1.0] {
            let phi = Potential::<f64>::make_depolarizing(p, 2, 2).unwrap();
            let eta = Eigenstate::extract(&phi, 2).unwrap();
            let report = nc_entropy(&phi, &eta).unwrap();
            assert!((report.h - 2.0f64.ln()).abs() < 1e-12);
            assert!(report.classical_lower_bound.is_none());
        }
    }

    #[test]
    fn gibbs_inequality_equality_at_the_same_potential() {
        let phis = [
            constant_half(),
            Potential::<f64>::make_first_coordinate(0.3).unwrap(),
            Potential::<f64>::make_first_coordinate(0.5).unwrap(),
        ];
        for phi in &phis {
            let value = gibbs_inequality(phi, phi).unwrap();
            assert!(value.abs() < 1e-12, "{value}");
        }
    }

    #[test]
    fn gibbs_inequality_strictly_negative_example() {
        // phi = first-coordinate(0.2), psi = constant 1/2:
        // value = log 2 + (1/2) log(0.2 * 0.8) < 0.
        let phi = Potential::<f64>::make_first_coordinate(0.2).unwrap();
        let psi = constant_half();
        let value = gibbs_inequality(&phi, &psi).unwrap();
        let expected = 2.0f64.ln() + 0.5 * (0.2 * 0.8f64).ln();
        assert!((value - expected).abs() < 1e-12);
        assert!(value < -0.2);
        // With the roles transposed the operator-Jensen excess of psi
        // makes the value positive: the inequality genuinely needs the
        // scalar-factor hypothesis on psi.
        let swapped = gibbs_inequality(&psi, &phi).unwrap();
        assert!((swapped + expected).abs() < 1e-12);
        assert!(swapped > 0.2);
    }

    #[test]
    fn gibbs_inequality_holds_for_scalar_factor_psi() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..50 {
            // psi with scalar factors q Id, (1-q) Id; phi general diagonal.
            let q = 0.05 + 0.9 * rng.gen::<f64>();
            let psi = Potential::make_trace_type(
                TransitionMatrix::full_shift(2),
                1,
                vec![
                    Element::from_matrix(dmatrix![q, 0.0; 0.0, q]),
                    Element::from_matrix(dmatrix![1.0 - q, 0.0; 0.0, 1.0 - q]),
                ],
            )
            .unwrap();
            let a = 0.05 + 0.9 * rng.gen::<f64>();
            let b = 0.05 + 0.9 * rng.gen::<f64>();
            let phi = Potential::make_trace_type(
                TransitionMatrix::full_shift(2),
                1,
                vec![
                    Element::from_matrix(dmatrix![a, 0.0; 0.0, b]),
                    Element::from_matrix(dmatrix![1.0 - a, 0.0; 0.0, 1.0 - b]),
                ],
            )
            .unwrap();
            let value = gibbs_inequality(&phi, &psi).unwrap();
            assert!(value <= 1e-10, "q {q}, a {a}, b {b}: {value}");
        }
    }

    #[test]
    fn gibbs_inequality_rejects_non_trace_type() {
        let phi = constant_half();
        let depol = Potential::<f64>::make_depolarizing(0.5, 2, 2).unwrap();
        assert!(gibbs_inequality(&phi, &depol).is_err());
        assert!(gibbs_inequality(&depol, &phi).is_err());
    }

    #[test]
    fn classical_reduction_depth_one() {
        let j = ScalarPotential::from_values(
            TransitionMatrix::full_shift(2),
            1,
            vec![0.3, 0.7],
        )
        .unwrap();
        let outcome = classical_reduction_check(&j).unwrap();
        let expected = -(0.3 * 0.3f64.ln() + 0.7 * 0.7f64.ln());
        assert!((outcome.ks - expected).abs() < 1e-12);
        assert!(outcome.defect < 1e-10);
        assert!(outcome.eta_residual < 1e-12);

        let uniform = ScalarPotential::<f64>::uniform(2);
        let outcome = classical_reduction_check(&uniform).unwrap();
        assert!((outcome.nc - 2.0f64.ln()).abs() < 1e-10);
        assert!((outcome.ks - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn classical_reduction_depth_two_seeded() {
        // Seeded normalized depth-2 scalar potentials on the full 2-shift:
        // J(a b) columns over a must sum to 1 for each b.
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let shift = TransitionMatrix::full_shift(2);
        for _ in 0..10 {
            let c1 = 0.05 + 0.9 * rng.gen::<f64>();
            let c2 = 0.05 + 0.9 * rng.gen::<f64>();
            // Lexicographic depth-2 words: 11, 12, 21, 22.
            let j = ScalarPotential::from_values(
                shift.clone(),
                2,
                vec![c1, c2, 1.0 - c1, 1.0 - c2],
            )
            .unwrap();
            let outcome = classical_reduction_check(&j).unwrap();
            assert!(outcome.defect < 1e-10, "defect {}", outcome.defect);
        }
    }

    #[test]
    fn entropy_is_invariant_under_deeper_tabulation() {
        let phi = Potential::<f64>::make_first_coordinate(0.25).unwrap();
        let h2 = nc_entropy(&phi, &Eigenstate::extract(&phi, 2).unwrap())
            .unwrap()
            .h;
        let h4 = nc_entropy(&phi, &Eigenstate::extract(&phi, 4).unwrap())
            .unwrap()
            .h;
        assert!((h2 - h4).abs() < 1e-11);
    }

    #[test]
    fn non_positive_jacobian_is_rejected() {
        // The branch-split Kraus Jacobian is diagonal with a zero entry
        // only at p = 0/1 boundaries; an interior P keeps it positive, so
        // use a custom map with a singular image instead.
        let desc = crate::algebra::AlgebraDescriptor::Matrix(2);
        let e11 = crate::algebra::LinearMap::from_fn(desc, |a: &Element<f64>| {
            let mut m = nalgebra::DMatrix::zeros(2, 2);
            m[(0, 0)] = a.data()[(0, 0)] + a.data()[(1, 1)];
            Element::from_matrix(m)
        });
        let zero = crate::algebra::LinearMap::zero(desc);
        let phi = Potential::make_custom(
            desc,
            TransitionMatrix::full_shift(2),
            1,
            vec![e11, zero],
            10,
            3,
        )
        .unwrap();
        assert!(matches!(
            log_jacobian(&phi),
            Err(Error::NotStrictlyPositive { .. })
        ));
    }
}
