//! Scalar abstraction: the whole numeric core is generic over the real
//! scalar type. `f64` is the default; `f32` works wherever the tolerances
//! are loosened accordingly.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable throughout the crate.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Lossy view as `f64`, for reports and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar -> f64 conversion")
    }
}

impl<T: RealField + Copy + FromPrimitive + ToPrimitive> Scalar for T {}

/// Converts an `f64` constant into the scalar type.
pub fn real<T: Scalar>(x: f64) -> T {
    <T as FromPrimitive>::from_f64(x).expect("f64 -> scalar conversion")
}
