//! Completely monotone, Bernstein and generalized Stieltjes families.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn non_negative<T: Scalar>(x: T) -> Result<()> {
    if x >= T::zero() {
        Ok(())
    } else {
        Err(Error::NegativeArgument(x.as_f64()))
    }
}

/// Bounded completely monotone function `φ` with `φ(0) = 1`, stored
/// together with its representing measure `μ` (`φ(x) = ∫ e^{-sx} dμ(s)`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", bound = "T: Scalar")]
pub enum CompletelyMonotoneSpec<T> {
    /// `φ(x) = e^{-cx}`; `μ` is the point mass at `c`.
    Exp { c: T },
    /// `φ(x) = (1 + cx)^{-λ}`; `μ` is Gamma with shape `λ` and rate `1/c`.
    InversePower { c: T, lambda: T },
}

/// Representing measure of a [`CompletelyMonotoneSpec`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LaplaceMeasure<T> {
    PointMass { at: T },
    Gamma { shape: T, rate: T },
}

impl<T: Scalar> LaplaceMeasure<T> {
    pub fn mean(&self) -> T {
        match *self {
            Self::PointMass { at } => at,
            Self::Gamma { shape, rate } => shape / rate,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match *self {
            Self::PointMass { at } => at,
            Self::Gamma { shape, rate } => {
                let dist = Gamma::new(shape.as_f64(), 1.0 / rate.as_f64()).expect("validated gamma parameters");
                T::lit(dist.sample(rng))
            }
        }
    }
}

impl<T: Scalar> CompletelyMonotoneSpec<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Exp { c } if c > T::zero() && c.is_finite() => Ok(()),
            Self::InversePower { c, lambda }
                if c > T::zero() && lambda > T::zero() && c.is_finite() && lambda.is_finite() =>
            {
                Ok(())
            }
            _ => Err(Error::InvalidParameter(format!(
                "completely monotone parameters must be positive: {self:?}"
            ))),
        }
    }

    pub fn eval(&self, x: T) -> Result<T> {
        non_negative(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: T) -> T {
        match *self {
            Self::Exp { c } => (-c * x).exp(),
            Self::InversePower { c, lambda } => (T::one() + c * x).powf(-lambda),
        }
    }

    pub fn measure(&self) -> LaplaceMeasure<T> {
        match *self {
            Self::Exp { c } => LaplaceMeasure::PointMass { at: c },
            Self::InversePower { c, lambda } => LaplaceMeasure::Gamma {
                shape: lambda,
                rate: T::one() / c,
            },
        }
    }

    /// One draw `R ~ μ`.
    pub fn sample_laplace_measure<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.measure().sample(rng)
    }
}

/// Bernstein function `g` on `[0, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", bound = "T: Scalar")]
pub enum BernsteinSpec<T> {
    /// `g(x) = x^α`, `α ∈ (0, 1]`.
    Power { alpha: T },
    /// `g(x) = log(1 + x)`.
    Log,
    /// `g(x) = 1 - e^{-cx}`.
    BoundedExp { c: T },
    /// `g(x) = a + bx`.
    Affine { a: T, b: T },
}

/// Lévy measure `ν` of a Bernstein function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LevyMeasure<T> {
    Zero,
    PointMass {
        at: T,
        weight: T,
    },
    /// Density `α/Γ(1-α)·t^{-1-α}`.
    Stable {
        alpha: T,
    },
    /// Density `e^{-t}/t`.
    Gamma,
}

impl<T: Scalar> LevyMeasure<T> {
    /// Density at `t > 0`; `None` for measures without a density.
    pub fn density(&self, t: T) -> Option<T> {
        match *self {
            Self::Zero => Some(T::zero()),
            Self::PointMass { .. } => None,
            Self::Stable { alpha } => {
                let a = alpha.as_f64();
                let coef = a / statrs::function::gamma::gamma(1.0 - a);
                Some(T::lit(coef) * t.powf(-T::one() - alpha))
            }
            Self::Gamma => Some((-t).exp() / t),
        }
    }
}

/// `g(x) = a + bx + ∫ (1 - e^{-xt}) dν(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BernsteinRepresentation<T> {
    pub a: T,
    pub b: T,
    pub levy: LevyMeasure<T>,
}

impl<T: Scalar> BernsteinSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Power { alpha } => alpha > T::zero() && alpha <= T::one(),
            Self::Log => true,
            Self::BoundedExp { c } => c > T::zero() && c.is_finite(),
            Self::Affine { a, b } => a >= T::zero() && b >= T::zero() && a.is_finite() && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid Bernstein function {self:?}")))
        }
    }

    pub fn eval(&self, x: T) -> Result<T> {
        non_negative(x)?;
        Ok(match *self {
            Self::Power { alpha } => x.powf(alpha),
            Self::Log => x.ln_1p(),
            Self::BoundedExp { c } => -(-c * x).exp_m1(),
            Self::Affine { a, b } => a + b * x,
        })
    }

    pub fn at_zero(&self) -> T {
        match *self {
            Self::Affine { a, .. } => a,
            _ => T::zero(),
        }
    }

    pub fn representation(&self) -> BernsteinRepresentation<T> {
        let (a, b, levy) = match *self {
            Self::Power { alpha } if alpha == T::one() => (T::zero(), T::one(), LevyMeasure::Zero),
            Self::Power { alpha } => (T::zero(), T::zero(), LevyMeasure::Stable { alpha }),
            Self::Log => (T::zero(), T::zero(), LevyMeasure::Gamma),
            Self::BoundedExp { c } => (
                T::zero(),
                T::zero(),
                LevyMeasure::PointMass {
                    at: c,
                    weight: T::one(),
                },
            ),
            Self::Affine { a, b } => (a, b, LevyMeasure::Zero),
        };
        BernsteinRepresentation { a, b, levy }
    }
}

/// Density family of a generalized Stieltjes measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", bound = "T: Scalar")]
pub enum StieltjesDensity<T> {
    /// `φ_ij(v) = B_ij·1[v ∈ [lower, upper]]`.
    Box {
        coefficients: Vec<Vec<T>>,
        lower: T,
        upper: T,
    },
}

/// Matrix of generalized Stieltjes functions of order `λ`,
/// `S_ij(x) = a + ∫ (x + v)^{-λ} φ_ij(v) dv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StieltjesSpec<T> {
    pub order: T,
    #[serde(default = "T::zero")]
    pub constant: T,
    pub density: StieltjesDensity<T>,
}

impl<T: Scalar> StieltjesSpec<T> {
    pub fn boxed(order: T, constant: T, coefficients: Vec<Vec<T>>, lower: T, upper: T) -> Result<Self> {
        let s = Self {
            order,
            constant,
            density: StieltjesDensity::Box {
                coefficients,
                lower,
                upper,
            },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.order > T::zero()) || !(self.constant >= T::zero()) {
            return Err(Error::InvalidParameter(
                "Stieltjes order must be > 0 and constant >= 0".into(),
            ));
        }
        let StieltjesDensity::Box {
            coefficients,
            lower,
            upper,
        } = &self.density;
        if !(*lower > T::zero() && *upper > *lower && upper.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "box support must satisfy 0 < lower < upper, got [{lower}, {upper}]"
            )));
        }
        let m = coefficients.len();
        if m == 0 || coefficients.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidParameter(
                "box coefficients must be a nonempty square matrix".into(),
            ));
        }
        let b = DMatrix::from_fn(m, m, |i, j| coefficients[i][j]);
        let scale = b.iter().fold(T::one(), |acc, x| acc.max(x.abs()));
        let slack = T::lit(T::EXACT_SLACK) * scale;
        if (&b - b.transpose()).iter().any(|x| x.abs() > slack) {
            return Err(Error::InvalidParameter("box coefficients must be symmetric".into()));
        }
        let min_eig = b.symmetric_eigenvalues().min();
        if min_eig < -T::lit(T::DEFAULT_REL_TOL) * scale {
            return Err(Error::InvalidParameter(format!(
                "box coefficients must be positive semi-definite, min eigenvalue {min_eig}"
            )));
        }
        Ok(())
    }

    pub fn variates(&self) -> usize {
        let StieltjesDensity::Box { coefficients, .. } = &self.density;
        coefficients.len()
    }

    /// `S_ij(x)`.
    pub fn eval(&self, i: usize, j: usize, x: T) -> Result<T> {
        let m = self.variates();
        if i >= m || j >= m {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                len: m,
            });
        }
        non_negative(x)?;
        let StieltjesDensity::Box {
            coefficients,
            lower,
            upper,
        } = &self.density;
        let lam = self.order;
        let integral = if lam == T::one() {
            ((x + *upper) / (x + *lower)).ln()
        } else {
            let e = T::one() - lam;
            ((x + *lower).powf(e) - (x + *upper).powf(e)) / (lam - T::one())
        };
        Ok(self.constant + coefficients[i][j] * integral)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn completely_monotone_normalized() {
        let phi = CompletelyMonotoneSpec::Exp { c: 1.0 };
        assert_eq!(phi.eval(0.0).unwrap(), 1.0);
        let phi = CompletelyMonotoneSpec::InversePower { c: 2.0, lambda: 0.7 };
        assert_eq!(phi.eval(0.0).unwrap(), 1.0);
        assert!(phi.eval(-1.0).is_err());
    }

    #[test]
    fn completely_monotone_non_increasing() {
        for phi in [
            CompletelyMonotoneSpec::Exp { c: 0.3 },
            CompletelyMonotoneSpec::InversePower { c: 1.5, lambda: 2.0 },
        ] {
            let vals: Vec<f64> = (0..100).map(|k| phi.eval(k as f64 * 0.1).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] <= w[0] && w[1] >= 0.0));
        }
    }

    #[test]
    fn point_mass_is_deterministic() {
        let phi = CompletelyMonotoneSpec::Exp { c: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert_eq!(phi.sample_laplace_measure(&mut rng), 1.0);
        }
    }

    fn mc_mean(phi: CompletelyMonotoneSpec<f64>, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 100_000;
        (0..n).map(|_| phi.sample_laplace_measure(&mut rng)).sum::<f64>() / n as f64
    }

    #[test]
    fn gamma_measure_means() {
        // Gamma mean = shape / rate = λc
        let m = mc_mean(CompletelyMonotoneSpec::InversePower { c: 1.0, lambda: 2.0 }, 11);
        assert!((m - 2.0).abs() <= 0.03, "{m}");
        let m = mc_mean(CompletelyMonotoneSpec::InversePower { c: 0.5, lambda: 1.0 }, 12);
        assert!((m - 0.5).abs() <= 0.01, "{m}");
    }

    #[test]
    fn inverse_power_matches_laplace_reconstruction() {
        let phi = CompletelyMonotoneSpec::InversePower { c: 1.3, lambda: 1.7 };
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws: Vec<f64> = (0..50_000).map(|_| phi.sample_laplace_measure(&mut rng)).collect();
        for x in [0.5, 1.0, 2.0] {
            let vals: Vec<f64> = draws.iter().map(|r| (-r * x).exp()).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let se = (var / n).sqrt();
            assert!((mean - phi.eval(x).unwrap()).abs() <= 3.0 * se, "x={x}");
        }
    }

    #[test]
    fn bernstein_values() {
        let g = BernsteinSpec::BoundedExp { c: 1.0 };
        assert_abs_diff_eq!(g.eval(1.0).unwrap(), 0.632_120_558_828_557_7, epsilon = 1e-15);
        assert_eq!(BernsteinSpec::Power { alpha: 0.5 }.eval(4.0).unwrap(), 2.0);
        assert_eq!(BernsteinSpec::Affine { a: 2.0, b: 3.0 }.at_zero(), 2.0);
        assert!(BernsteinSpec::Log.eval(-0.1).is_err());
        assert!(BernsteinSpec::Power { alpha: 1.5 }.validate().is_err());
    }

    /// `∫_0^∞ f(t) dt` via `t = e^s` and composite Simpson on `[lo, hi]`.
    fn log_quadrature(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let g = |s: f64| {
            let t = s.exp();
            f(t) * t
        };
        let mut acc = g(lo) + g(hi);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * g(lo + k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn bernstein_representation_reproduces_g() {
        for g in [
            BernsteinSpec::Power { alpha: 0.5 },
            BernsteinSpec::Log,
            BernsteinSpec::BoundedExp { c: 0.7 },
            BernsteinSpec::Affine { a: 0.0, b: 2.0 },
            BernsteinSpec::Power { alpha: 1.0 },
        ] {
            let rep: BernsteinRepresentation<f64> = g.representation();
            for x in [0.25, 1.0, 3.0] {
                let jump = match rep.levy {
                    LevyMeasure::Zero => 0.0,
                    LevyMeasure::PointMass { at, weight } => weight * (1.0 - (-x * at).exp()),
                    ref m => log_quadrature(|t| (1.0 - (-x * t).exp()) * m.density(t).unwrap(), -60.0, 200.0, 40_000),
                };
                let recon = rep.a + rep.b * x + jump;
                assert_abs_diff_eq!(recon, g.eval(x).unwrap(), epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn stieltjes_closed_forms() {
        let s = StieltjesSpec::boxed(1.0, 0.0, vec![vec![1.0]], 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(s.eval(0, 0, 0.0).unwrap(), std::f64::consts::LN_2, epsilon = 1e-15);
        // ∫_1^2 (x+v)^{-2} dv at x = 1: 1/2 - 1/3
        let s = StieltjesSpec::boxed(2.0, 0.5, vec![vec![3.0]], 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(s.eval(0, 0, 1.0).unwrap(), 0.5 + 3.0 / 6.0, epsilon = 1e-15);
        assert!(s.eval(0, 0, -1.0).is_err());
        assert!(s.eval(1, 0, 0.0).is_err());
    }

    #[test]
    fn stieltjes_rejects_indefinite_coefficients() {
        let r = StieltjesSpec::boxed(1.0, 0.0, vec![vec![1.0, 2.0], vec![2.0, 1.0]], 1.0, 2.0);
        assert!(r.is_err());
        assert!(StieltjesSpec::boxed(1.0, 0.0, vec![vec![1.0]], 0.0, 2.0).is_err());
    }
}
