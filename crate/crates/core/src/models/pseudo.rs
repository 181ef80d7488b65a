use serde::{Deserialize, Serialize};

use super::scalar_fns::BernsteinSpec;
use super::variogram::{StationaryCovariance, UnivariateVariogram};
use crate::error::{Error, Result};
use crate::function::{check_args, MatrixFunction};
use crate::scalar::{norm, Scalar};

/// One latent factor of a delayed linear model of coregionalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LmcFactor<T> {
    pub covariance: StationaryCovariance<T>,
    /// `A_·k`, one loading per variate.
    pub loadings: Vec<T>,
    /// `τ_·k`, one delay vector per variate.
    pub delays: Vec<Vec<T>>,
}

/// Explicit entry `constant + scale·‖h‖^power`, multiplied by the sign of
/// `h_1` when `odd` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EntryFormula<T> {
    #[serde(default = "T::zero")]
    pub constant: T,
    #[serde(default = "T::zero")]
    pub scale: T,
    #[serde(default = "T::one")]
    pub power: T,
    #[serde(default)]
    pub odd: bool,
}

impl<T: Scalar> EntryFormula<T> {
    pub fn zero() -> Self {
        Self {
            constant: T::zero(),
            scale: T::zero(),
            power: T::one(),
            odd: false,
        }
    }

    /// `scale·‖h‖^power`.
    pub fn power(scale: T, power: T) -> Self {
        Self {
            scale,
            power,
            ..Self::zero()
        }
    }

    pub fn constant(constant: T) -> Self {
        Self {
            constant,
            ..Self::zero()
        }
    }

    /// `scale·sign(h_1)·‖h‖^power`.
    pub fn odd(scale: T, power: T) -> Self {
        Self {
            scale,
            power,
            odd: true,
            ..Self::zero()
        }
    }

    pub fn eval(&self, h: &[T]) -> T {
        let mut v = self.scale * norm(h).powf(self.power);
        if self.odd {
            let s = h.first().copied().unwrap_or_else(T::zero);
            v *= if s > T::zero() {
                T::one()
            } else if s < T::zero() {
                -T::one()
            } else {
                T::zero()
            };
        }
        self.constant + v
    }
}

/// Matrix-valued pseudo-variogram `γ: R^l → R^{m×m}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", bound = "T: Scalar")]
pub enum PseudoVariogramModel<T> {
    /// `γ_ij(h) = γ0(h + τ_i - τ_j)`.
    Shift {
        base: UnivariateVariogram<T>,
        delays: Vec<Vec<T>>,
    },
    /// `γ_ij(h) = γ0(h) + ½(σ_i² + σ_j²)·[i ≠ j or h ≠ 0]`.
    NoisyCommon {
        base: UnivariateVariogram<T>,
        dim: usize,
        noise: Vec<T>,
    },
    /// `γ_ij(h) = ½ Σ_k [(A_ik² + A_jk²)C_k(0) - 2A_ik A_jk C_k(h + τ_ik - τ_jk)]`.
    DelayedLmc { factors: Vec<LmcFactor<T>> },
    /// `γ_ij = g ∘ base_ij` with `g(0) = 0`.
    Composed {
        g: BernsteinSpec<T>,
        base: Box<PseudoVariogramModel<T>>,
    },
    /// Arbitrary entry formulas; not valid by construction.
    Tabulated {
        dim: usize,
        entries: Vec<Vec<EntryFormula<T>>>,
    },
}

impl<T: Scalar> PseudoVariogramModel<T> {
    pub fn shift(base: UnivariateVariogram<T>, delays: Vec<Vec<T>>) -> Result<Self> {
        let m = Self::Shift { base, delays };
        m.validate()?;
        Ok(m)
    }

    pub fn noisy_common(base: UnivariateVariogram<T>, dim: usize, noise: Vec<T>) -> Result<Self> {
        let m = Self::NoisyCommon { base, dim, noise };
        m.validate()?;
        Ok(m)
    }

    pub fn delayed_lmc(factors: Vec<LmcFactor<T>>) -> Result<Self> {
        let m = Self::DelayedLmc { factors };
        m.validate()?;
        Ok(m)
    }

    pub fn composed(g: BernsteinSpec<T>, base: PseudoVariogramModel<T>) -> Result<Self> {
        let m = Self::Composed {
            g,
            base: Box::new(base),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn tabulated(dim: usize, entries: Vec<Vec<EntryFormula<T>>>) -> Result<Self> {
        let m = Self::Tabulated { dim, entries };
        m.validate()?;
        Ok(m)
    }

    /// `γ ≡ 0` on `R^dim` with `m` variates.
    pub fn zero(dim: usize, m: usize) -> Self {
        Self::Tabulated {
            dim,
            entries: vec![vec![EntryFormula::zero(); m]; m],
        }
    }

    /// Whether the variant is valid by construction.
    pub fn is_catalog(&self) -> bool {
        match self {
            Self::Tabulated { .. } => false,
            Self::Composed { base, .. } => base.is_catalog(),
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            Self::Shift { base, delays } => {
                base.validate()?;
                let Some(first) = delays.first() else {
                    return invalid("shift model needs at least one delay".into());
                };
                if first.is_empty() {
                    return invalid("delays must have dimension >= 1".into());
                }
                for d in delays {
                    if d.len() != first.len() {
                        return Err(Error::DimensionMismatch {
                            expected: first.len(),
                            got: d.len(),
                        });
                    }
                    if d.iter().any(|x| !x.is_finite()) {
                        return invalid("delays must be finite".into());
                    }
                }
            }
            Self::NoisyCommon { base, dim, noise } => {
                base.validate()?;
                if *dim == 0 || noise.is_empty() {
                    return invalid("noisy model needs dim >= 1 and at least one variate".into());
                }
                if noise.iter().any(|s| !(*s >= T::zero()) || !s.is_finite()) {
                    return invalid("noise variances must be >= 0".into());
                }
            }
            Self::DelayedLmc { factors } => {
                let Some(first) = factors.first() else {
                    return invalid("delayed LMC needs at least one factor".into());
                };
                let m = first.loadings.len();
                let dim = first.delays.first().map_or(0, Vec::len);
                if m == 0 || dim == 0 {
                    return invalid("delayed LMC needs m >= 1 and delay dimension >= 1".into());
                }
                for f in factors {
                    f.covariance.validate()?;
                    if f.loadings.len() != m {
                        return Err(Error::DimensionMismatch {
                            expected: m,
                            got: f.loadings.len(),
                        });
                    }
                    if f.delays.len() != m {
                        return Err(Error::DimensionMismatch {
                            expected: m,
                            got: f.delays.len(),
                        });
                    }
                    for d in &f.delays {
                        if d.len() != dim {
                            return Err(Error::DimensionMismatch {
                                expected: dim,
                                got: d.len(),
                            });
                        }
                    }
                }
            }
            Self::Composed { g, base } => {
                g.validate()?;
                base.validate()?;
                if g.at_zero() != T::zero() {
                    return invalid(format!(
                        "composition needs g(0) = 0 to yield a pseudo-variogram, got g(0) = {}",
                        g.at_zero()
                    ));
                }
            }
            Self::Tabulated { dim, entries } => {
                let m = entries.len();
                if *dim == 0 || m == 0 || entries.iter().any(|r| r.len() != m) {
                    return invalid("tabulated model needs dim >= 1 and a nonempty square table".into());
                }
            }
        }
        Ok(())
    }

    fn eval_unchecked(&self, i: usize, j: usize, h: &[T]) -> Result<T> {
        Ok(match self {
            Self::Shift { base, delays } => {
                let lag: Vec<T> = h
                    .iter()
                    .zip(&delays[i])
                    .zip(&delays[j])
                    .map(|((&x, &a), &b)| x + a - b)
                    .collect();
                base.eval(&lag)
            }
            Self::NoisyCommon { base, noise, .. } => {
                let nugget = if i != j || h.iter().any(|&x| x != T::zero()) {
                    (noise[i] + noise[j]) * T::lit(0.5)
                } else {
                    T::zero()
                };
                base.eval(h) + nugget
            }
            Self::DelayedLmc { factors } => {
                let mut acc = T::zero();
                let mut lag = vec![T::zero(); h.len()];
                for f in factors {
                    let (ai, aj) = (f.loadings[i], f.loadings[j]);
                    for (k, l) in lag.iter_mut().enumerate() {
                        *l = h[k] + f.delays[i][k] - f.delays[j][k];
                    }
                    acc += (ai * ai + aj * aj) * f.covariance.at_origin()
                        - T::lit(2.0) * ai * aj * f.covariance.eval(&lag);
                }
                // rounding may leave a tiny negative where the exact value is 0
                (acc * T::lit(0.5)).max(T::zero())
            }
            Self::Composed { g, base } => g.eval(base.eval_unchecked(i, j, h)?)?,
            Self::Tabulated { entries, .. } => entries[i][j].eval(h),
        })
    }
}

impl<T: Scalar> MatrixFunction<T> for PseudoVariogramModel<T> {
    fn variates(&self) -> usize {
        match self {
            Self::Shift { delays, .. } => delays.len(),
            Self::NoisyCommon { noise, .. } => noise.len(),
            Self::DelayedLmc { factors } => factors.first().map_or(0, |f| f.loadings.len()),
            Self::Composed { base, .. } => base.variates(),
            Self::Tabulated { entries, .. } => entries.len(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Self::Shift { delays, .. } => delays.first().map_or(0, Vec::len),
            Self::NoisyCommon { dim, .. } | Self::Tabulated { dim, .. } => *dim,
            Self::DelayedLmc { factors } => factors.first().and_then(|f| f.delays.first()).map_or(0, Vec::len),
            Self::Composed { base, .. } => base.dim(),
        }
    }

    fn eval(&self, i: usize, j: usize, h: &[T]) -> Result<T> {
        check_args(self.variates(), self.dim(), i, j, h)?;
        if h.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("lag must be finite".into()));
        }
        self.eval_unchecked(i, j, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shift01() -> PseudoVariogramModel<f64> {
        PseudoVariogramModel::shift(UnivariateVariogram::linear(), vec![vec![0.0], vec![1.0]]).unwrap()
    }

    #[test]
    fn shift_hand_values() {
        let g = shift01();
        assert_eq!(g.eval(0, 0, &[0.0]).unwrap(), 0.0);
        assert_eq!(g.eval(0, 1, &[0.0]).unwrap(), 1.0);
        assert_eq!(g.eval(1, 0, &[0.5]).unwrap(), 1.5);
    }

    #[test]
    fn eval_errors() {
        let g = shift01();
        assert!(matches!(g.eval(2, 0, &[0.0]), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(
            g.eval(0, 0, &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn noisy_common_nugget_only_off_origin() {
        let g = PseudoVariogramModel::noisy_common(UnivariateVariogram::linear(), 1, vec![1.0, 4.0]).unwrap();
        assert_eq!(g.eval(0, 0, &[0.0]).unwrap(), 0.0);
        assert_eq!(g.eval(0, 0, &[1e-300]).unwrap(), 1.0 + 1e-300);
        assert_eq!(g.eval(0, 1, &[0.0]).unwrap(), 2.5);
        assert_eq!(g.eval(1, 1, &[2.0]).unwrap(), 6.0);
    }

    #[test]
    fn delayed_lmc_diagonal_vanishes() {
        let f = LmcFactor {
            covariance: StationaryCovariance::exponential(2.0, 1.5).unwrap(),
            loadings: vec![1.0, -0.5],
            delays: vec![vec![0.0], vec![0.3]],
        };
        let g = PseudoVariogramModel::delayed_lmc(vec![f]).unwrap();
        assert_eq!(g.eval(0, 0, &[0.0]).unwrap(), 0.0);
        assert_eq!(g.eval(1, 1, &[0.0]).unwrap(), 0.0);
        // γ_12(0.3) has zero effective lag: ½[(1 + 0.25)·2 + 2·0.5·2] = 2.25
        assert!((g.eval(0, 1, &[0.3]).unwrap() - 2.25_f64).abs() < 1e-15);
    }

    #[test]
    fn composed_rejects_nonzero_g0() {
        let r = PseudoVariogramModel::composed(BernsteinSpec::Affine { a: 1.0, b: 1.0 }, shift01());
        assert!(r.is_err());
        let c = PseudoVariogramModel::composed(BernsteinSpec::BoundedExp { c: 1.0 }, shift01()).unwrap();
        assert!((c.eval(0, 1, &[0.0]).unwrap() - 0.632_120_558_828_557_7).abs() < 1e-15);
    }

    #[test]
    fn tabulated_odd_entry() {
        let g = PseudoVariogramModel::tabulated(
            1,
            vec![
                vec![EntryFormula::power(1.0, 1.0), EntryFormula::odd(1.0, 1.0)],
                vec![EntryFormula::odd(-1.0, 1.0), EntryFormula::power(1.0, 1.0)],
            ],
        )
        .unwrap();
        assert_eq!(g.eval(0, 1, &[-1.0]).unwrap(), -1.0);
        assert_eq!(g.eval(1, 0, &[1.0]).unwrap(), -1.0);
        assert!(!g.is_catalog());
    }
}
