//! Floating point abstraction shared by every module.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the library is generic over: `f32` or `f64`.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Serialize + DeserializeOwned + Display + Debug + Send + Sync + 'static
{
    /// Relative slack applied to eigenvalues of assembled block matrices.
    const DEFAULT_REL_TOL: f64;
    /// Slack for exact identities such as `γ_ii(0) = 0`.
    const EXACT_SLACK: f64;
    /// Relative asymmetry tolerated in matrices that should be symmetric.
    const SYMMETRY_SLACK: f64;

    /// Converts a literal; all literals used by the library are representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const DEFAULT_REL_TOL: f64 = 1e-8;
    const EXACT_SLACK: f64 = 1e-12;
    const SYMMETRY_SLACK: f64 = 1e-10;
}

impl Scalar for f32 {
    const DEFAULT_REL_TOL: f64 = 1e-4;
    const EXACT_SLACK: f64 = 1e-5;
    const SYMMETRY_SLACK: f64 = 1e-5;
}

/// Euclidean norm.
pub fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

pub fn norm_sq<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x)
}
