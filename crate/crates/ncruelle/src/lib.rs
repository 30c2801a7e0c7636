//! Noncommutative Ruelle transfer operators for operator-valued potentials
//! on aperiodic subshifts of finite type.
//!
//! The crate computes the Gibbs eigenstate, the spectrum, and the entropy of
//! the transfer operator associated with a locally constant potential taking
//! values in positivity-improving linear maps on a finite-dimensional real
//! C*-algebra (`M_d(R)` or `R^N`), and cross-checks every closed-form value
//! against independent iterative, spectral, and Monte Carlo routes.
//!
//! All numerical code is generic over the scalar type through [`Scalar`];
//! the concrete `f64` aliases below are what the CLI and most callers use.

pub mod algebra;
pub mod channel;
pub mod classical;
pub mod config;
pub mod cylfun;
pub mod entropy;
pub mod error;
pub mod mc;
pub mod potential;
pub mod report;
pub mod scalar;
pub mod sft;
pub mod transfer;
pub mod eigenstate;

pub use error::{Error, Result};
pub use scalar::{real, Scalar};

/// Default cap on dense table entries (`W_n * dim`), see [`sft`].
pub const DEFAULT_CAPACITY_CAP: usize = 1 << 22;

pub type Element64 = algebra::Element<f64>;
pub type LinearMap64 = algebra::LinearMap<f64>;
pub type CylinderFunction64 = cylfun::CylinderFunction<f64>;
pub type Potential64 = potential::Potential<f64>;
pub type TransferMatrix64 = transfer::TransferMatrix<f64>;
pub type Eigenstate64 = eigenstate::Eigenstate<f64>;
pub type ScalarPotential64 = classical::ScalarPotential<f64>;
pub type MarkovMeasure64 = classical::MarkovMeasure<f64>;
pub type EntropyReport64 = entropy::EntropyReport<f64>;
