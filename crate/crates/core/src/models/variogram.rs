use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{norm, Scalar};

/// Isotropic univariate variogram `γ0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", bound = "T: Scalar")]
pub enum UnivariateVariogram<T> {
    /// `γ0(h) = c·‖h‖^α` with `α ∈ (0, 2]`. `c = 0` gives the trivial variogram.
    Power { c: T, alpha: T },
}

impl<T: Scalar> UnivariateVariogram<T> {
    pub fn power(c: T, alpha: T) -> Result<Self> {
        let v = Self::Power { c, alpha };
        v.validate()?;
        Ok(v)
    }

    /// `γ0(h) = ‖h‖`.
    pub fn linear() -> Self {
        Self::Power {
            c: T::one(),
            alpha: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Power { c, alpha } => {
                if !(c >= T::zero()) || !c.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "power variogram scale {c} must be >= 0"
                    )));
                }
                if !(alpha > T::zero() && alpha <= T::lit(2.0)) {
                    return Err(Error::InvalidParameter(format!(
                        "power variogram exponent {alpha} must lie in (0, 2]"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, h: &[T]) -> T {
        match *self {
            Self::Power { c, alpha } => c * norm(h).powf(alpha),
        }
    }
}

/// Stationary scalar covariance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", bound = "T: Scalar")]
pub enum StationaryCovariance<T> {
    /// `C(h) = σ²·exp(-‖h‖/a)`.
    Exponential { sill: T, range: T },
}

impl<T: Scalar> StationaryCovariance<T> {
    pub fn exponential(sill: T, range: T) -> Result<Self> {
        let c = Self::Exponential { sill, range };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Exponential { sill, range } => {
                if !(sill > T::zero() && range > T::zero()) {
                    return Err(Error::InvalidParameter(format!(
                        "exponential covariance needs sill > 0 and range > 0, got {sill}, {range}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn at_origin(&self) -> T {
        match *self {
            Self::Exponential { sill, .. } => sill,
        }
    }

    pub fn eval(&self, h: &[T]) -> T {
        match *self {
            Self::Exponential { sill, range } => sill * (-norm(h) / range).exp(),
        }
    }
}
