use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Scalar type accepted by every routine in the crate.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal out of range")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn machine_eps() -> Self {
        Self::default_epsilon()
    }

    /// A relative tolerance of `nominal` for `f64`, widened when the scalar
    /// cannot resolve it.
    fn rel_tol(nominal: f64) -> Self {
        let floor = Self::machine_eps() * Self::lit(1.0e3);
        Self::lit(nominal).max(floor)
    }
}

impl<T> Real for T where
    T: RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
}
