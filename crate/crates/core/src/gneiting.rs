//! Gneiting-type space-time covariance models.
//!
//! `G_ij(h, u)` is evaluated at a spatial lag `h ∈ R^d` and a temporal lag
//! `u ∈ R^l`; `‖·‖` is Euclidean throughout.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::definiteness::assemble_kernel_block;
use crate::error::{Error, Result};
use crate::function::{check_args, MatrixFunction, MatrixKernel};
use crate::models::{BernsteinSpec, CompletelyMonotoneSpec, PseudoVariogramModel, StieltjesSpec};
use crate::points::PointConfig;
use crate::scalar::{norm_sq, Scalar};

/// `offset·1 1ᵀ + γ`: conditionally negative definite whenever `γ` is, and
/// strictly positive when `offset > 0` and `γ ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CndFunction<T> {
    #[serde(default = "T::zero")]
    pub offset: T,
    pub base: PseudoVariogramModel<T>,
}

impl<T: Scalar> CndFunction<T> {
    pub fn new(offset: T, base: PseudoVariogramModel<T>) -> Result<Self> {
        if !(offset >= T::zero()) {
            return Err(Error::InvalidParameter(format!("offset must be >= 0, got {offset}")));
        }
        base.validate()?;
        Ok(Self { offset, base })
    }
}

impl<T: Scalar> MatrixFunction<T> for CndFunction<T> {
    fn variates(&self) -> usize {
        self.base.variates()
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, i: usize, j: usize, h: &[T]) -> Result<T> {
        Ok(self.offset + self.base.eval(i, j, h)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", bound = "T: Scalar")]
pub enum GneitingModel<T> {
    /// `G(h, u) = ψ(‖u‖²)^{-d/2} φ(‖h‖²/ψ(‖u‖²))`, univariate, `ψ(0) > 0`.
    Original {
        phi: CompletelyMonotoneSpec<T>,
        psi: BernsteinSpec<T>,
        spatial_dim: usize,
        #[serde(default = "one_usize")]
        temporal_dim: usize,
    },
    /// `G_ij(h, u) = (1 + γ_ij(u))^{-r} φ(‖h‖²/(1 + γ_ij(u)))`, `r ≥ d/2`.
    MultivariateExtended {
        phi: CompletelyMonotoneSpec<T>,
        gamma: PseudoVariogramModel<T>,
        exponent: T,
        spatial_dim: usize,
    },
    /// `G_ij(h, u) = f_ij(u)^{-r} S_ij(g_ij(h)/f_ij(u))`, `r ≥ λ`.
    Stieltjes {
        stieltjes: StieltjesSpec<T>,
        g: CndFunction<T>,
        f: CndFunction<T>,
        exponent: T,
    },
}

fn one_usize() -> usize {
    1
}

impl<T: Scalar> GneitingModel<T> {
    /// Multivariate extended model with `r = d/2`.
    pub fn multivariate_extended(
        phi: CompletelyMonotoneSpec<T>,
        gamma: PseudoVariogramModel<T>,
        spatial_dim: usize,
    ) -> Result<Self> {
        let r = T::lit(spatial_dim as f64 / 2.0);
        Self::multivariate_extended_with_exponent(phi, gamma, r, spatial_dim)
    }

    pub fn multivariate_extended_with_exponent(
        phi: CompletelyMonotoneSpec<T>,
        gamma: PseudoVariogramModel<T>,
        exponent: T,
        spatial_dim: usize,
    ) -> Result<Self> {
        let m = Self::MultivariateExtended {
            phi,
            gamma,
            exponent,
            spatial_dim,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn original(phi: CompletelyMonotoneSpec<T>, psi: BernsteinSpec<T>, spatial_dim: usize) -> Result<Self> {
        let m = Self::Original {
            phi,
            psi,
            spatial_dim,
            temporal_dim: 1,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn stieltjes(stieltjes: StieltjesSpec<T>, g: CndFunction<T>, f: CndFunction<T>, exponent: T) -> Result<Self> {
        let m = Self::Stieltjes {
            stieltjes,
            g,
            f,
            exponent,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            Self::Original {
                phi,
                psi,
                spatial_dim,
                temporal_dim,
            } => {
                phi.validate()?;
                psi.validate()?;
                if *spatial_dim == 0 || *temporal_dim == 0 {
                    return invalid("dimensions must be >= 1".into());
                }
                if !(psi.at_zero() > T::zero()) {
                    return invalid(format!("psi(0) must be > 0, got {}", psi.at_zero()));
                }
            }
            Self::MultivariateExtended {
                phi,
                gamma,
                exponent,
                spatial_dim,
            } => {
                phi.validate()?;
                gamma.validate()?;
                if *spatial_dim == 0 {
                    return invalid("spatial dimension must be >= 1".into());
                }
                let half_d = T::lit(*spatial_dim as f64 / 2.0);
                if !(*exponent >= half_d) {
                    return invalid(format!("exponent {exponent} must be >= d/2 = {half_d}"));
                }
            }
            Self::Stieltjes {
                stieltjes,
                g,
                f,
                exponent,
            } => {
                stieltjes.validate()?;
                g.base.validate()?;
                f.base.validate()?;
                let m = stieltjes.variates();
                for (name, v) in [("g", g.variates()), ("f", f.variates())] {
                    if v != m {
                        return invalid(format!("{name} has {v} variates, Stieltjes matrix has {m}"));
                    }
                }
                if !(g.offset >= T::zero() && f.offset >= T::zero()) {
                    return invalid("offsets must be >= 0".into());
                }
                if !(*exponent >= stieltjes.order) {
                    return invalid(format!("exponent {exponent} must be >= order {}", stieltjes.order));
                }
            }
        }
        Ok(())
    }

    pub fn variates(&self) -> usize {
        match self {
            Self::Original { .. } => 1,
            Self::MultivariateExtended { gamma, .. } => gamma.variates(),
            Self::Stieltjes { stieltjes, .. } => stieltjes.variates(),
        }
    }

    pub fn spatial_dim(&self) -> usize {
        match self {
            Self::Original { spatial_dim, .. } | Self::MultivariateExtended { spatial_dim, .. } => *spatial_dim,
            Self::Stieltjes { g, .. } => g.dim(),
        }
    }

    pub fn temporal_dim(&self) -> usize {
        match self {
            Self::Original { temporal_dim, .. } => *temporal_dim,
            Self::MultivariateExtended { gamma, .. } => gamma.dim(),
            Self::Stieltjes { f, .. } => f.dim(),
        }
    }

    /// `G_ij(h, u)`, indices zero-based.
    pub fn eval(&self, i: usize, j: usize, h: &[T], u: &[T]) -> Result<T> {
        check_args(self.variates(), self.spatial_dim(), i, j, h)?;
        if u.len() != self.temporal_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.temporal_dim(),
                got: u.len(),
            });
        }
        let h2 = norm_sq(h);
        match self {
            Self::Original {
                phi, psi, spatial_dim, ..
            } => {
                let p = psi.eval(norm_sq(u))?;
                let half_d = T::lit(*spatial_dim as f64 / 2.0);
                Ok(p.powf(-half_d) * phi.eval(h2 / p)?)
            }
            Self::MultivariateExtended {
                phi, gamma, exponent, ..
            } => {
                let a = T::one() + gamma.eval(i, j, u)?;
                Ok(a.powf(-*exponent) * phi.eval(h2 / a)?)
            }
            Self::Stieltjes {
                stieltjes,
                g,
                f,
                exponent,
            } => {
                let fv = f.eval(i, j, u)?;
                if !(fv > T::zero()) {
                    return Err(Error::NonPositiveEntry {
                        i,
                        j,
                        value: fv.as_f64(),
                    });
                }
                let gv = g.eval(i, j, h)?;
                if gv < T::zero() {
                    return Err(Error::NegativeEntry {
                        i,
                        j,
                        value: gv.as_f64(),
                    });
                }
                Ok(fv.powf(-*exponent) * stieltjes.eval(i, j, gv / fv)?)
            }
        }
    }
}

/// Kernel on `R^{d+l}`: points are `(space, time)` concatenated.
impl<T: Scalar> MatrixKernel<T> for GneitingModel<T> {
    fn variates(&self) -> usize {
        GneitingModel::variates(self)
    }

    fn dim(&self) -> usize {
        self.spatial_dim() + self.temporal_dim()
    }

    fn eval(&self, i: usize, j: usize, x: &[T], y: &[T]) -> Result<T> {
        let dim = MatrixKernel::dim(self);
        for p in [x, y] {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        let d = self.spatial_dim();
        let lag: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
        GneitingModel::eval(self, i, j, &lag[..d], &lag[d..])
    }
}

/// Covariance matrix over `space × time × components`. Row index is
/// `(s·n_t + t)·m + i`.
pub fn assemble_spacetime_cov<T: Scalar>(
    model: &GneitingModel<T>,
    space: &PointConfig<T>,
    time: &PointConfig<T>,
) -> Result<DMatrix<T>> {
    if space.dim() != model.spatial_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.spatial_dim(),
            got: space.dim(),
        });
    }
    if time.dim() != model.temporal_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.temporal_dim(),
            got: time.dim(),
        });
    }
    assemble_kernel_block(model, &PointConfig::product(space, time))
}
