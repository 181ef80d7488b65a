//! Maps from conditionally negative definite functions to positive definite
//! ones and back.

use rand::Rng;

use crate::definiteness::{check_pd, DefinitenessReport, Tolerance};
use crate::error::{Error, Result};
use crate::function::{check_args, MatrixFunction, MatrixKernel, Stationary};
use crate::models::{BernsteinSpec, CompletelyMonotoneSpec, LaplaceMeasure, PseudoVariogramModel};
use crate::points::PointConfig;
use crate::scalar::Scalar;

fn positive<T: Scalar>(name: &str, x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

fn non_negative_entry<T: Scalar>(i: usize, j: usize, v: T) -> Result<T> {
    if v < T::zero() {
        Err(Error::NegativeEntry {
            i,
            j,
            value: v.as_f64(),
        })
    } else {
        Ok(v)
    }
}

/// `h ↦ (exp(-t·γ_ij(h)))`.
#[derive(Clone, Debug)]
pub struct SchoenbergMap<F, T> {
    gamma: F,
    t: T,
}

pub fn schoenberg_map<T: Scalar, F: MatrixFunction<T>>(gamma: F, t: T) -> Result<SchoenbergMap<F, T>> {
    positive("t", t)?;
    Ok(SchoenbergMap { gamma, t })
}

impl<T: Scalar, F: MatrixFunction<T>> MatrixFunction<T> for SchoenbergMap<F, T> {
    fn variates(&self) -> usize {
        self.gamma.variates()
    }

    fn dim(&self) -> usize {
        self.gamma.dim()
    }

    fn eval(&self, i: usize, j: usize, h: &[T]) -> Result<T> {
        Ok((-self.t * self.gamma.eval(i, j, h)?).exp())
    }
}

/// `h ↦ ((1 + t·γ_ij(h))^{-λ})`; requires non-negative entries.
#[derive(Clone, Debug)]
pub struct LaplaceMap<F, T> {
    gamma: F,
    t: T,
    lambda: T,
}

pub fn laplace_map<T: Scalar, F: MatrixFunction<T>>(gamma: F, t: T, lambda: T) -> Result<LaplaceMap<F, T>> {
    positive("t", t)?;
    positive("lambda", lambda)?;
    Ok(LaplaceMap { gamma, t, lambda })
}

impl<T: Scalar, F: MatrixFunction<T>> MatrixFunction<T> for LaplaceMap<F, T> {
    fn variates(&self) -> usize {
        self.gamma.variates()
    }

    fn dim(&self) -> usize {
        self.gamma.dim()
    }

    fn eval(&self, i: usize, j: usize, h: &[T]) -> Result<T> {
        let g = non_negative_entry(i, j, self.gamma.eval(i, j, h)?)?;
        Ok((T::one() + self.t * g).powf(-self.lambda))
    }
}

/// Monte Carlo Laplace transform `h ↦ (1/K) Σ_k exp(-s_k·t·γ_ij(h))` with
/// `s_k ~ μ` drawn once at construction, so the result is a fixed function.
#[derive(Clone, Debug)]
pub struct GeneralLaplaceMap<F, T> {
    gamma: F,
    t: T,
    draws: Vec<T>,
}

impl<F, T: Scalar> GeneralLaplaceMap<F, T> {
    pub fn draws(&self) -> &[T] {
        &self.draws
    }
}

pub fn general_laplace_map<T: Scalar, F: MatrixFunction<T>, R: Rng + ?Sized>(
    gamma: F,
    t: T,
    measure: &CompletelyMonotoneSpec<T>,
    mc_draws: usize,
    rng: &mut R,
) -> Result<GeneralLaplaceMap<F, T>> {
    positive("t", t)?;
    measure.validate()?;
    if mc_draws < 1 {
        return Err(Error::InvalidParameter("Monte Carlo draw count must be >= 1".into()));
    }
    let draws = match measure.measure() {
        // a point mass needs one draw and then reproduces exp(-c t γ) exactly
        LaplaceMeasure::PointMass { at } => vec![at],
        m => (0..mc_draws).map(|_| m.sample(rng)).collect(),
    };
    Ok(GeneralLaplaceMap { gamma, t, draws })
}

impl<T: Scalar, F: MatrixFunction<T>> MatrixFunction<T> for GeneralLaplaceMap<F, T> {
    fn variates(&self) -> usize {
        self.gamma.variates()
    }

    fn dim(&self) -> usize {
        self.gamma.dim()
    }

    fn eval(&self, i: usize, j: usize, h: &[T]) -> Result<T> {
        let g = non_negative_entry(i, j, self.gamma.eval(i, j, h)?)?;
        let x = self.t * g;
        let sum = self.draws.iter().fold(T::zero(), |acc, &s| acc + (-s * x).exp());
        Ok(sum / T::lit(self.draws.len() as f64))
    }
}

/// `h ↦ (1 1ᵀ - exp*(-tγ(h)))/t`, which tends to `γ` as `t → 0` with
/// `|γ_ij - residual_ij| ≤ t·γ_ij²/2` for non-negative entries.
#[derive(Clone, Debug)]
pub struct InverseSchoenbergResidual<F, T> {
    gamma: F,
    t: T,
}

pub fn inverse_schoenberg_residual<T: Scalar, F: MatrixFunction<T>>(
    gamma: F,
    t: T,
) -> Result<InverseSchoenbergResidual<F, T>> {
    positive("t", t)?;
    Ok(InverseSchoenbergResidual { gamma, t })
}

impl<T: Scalar, F: MatrixFunction<T>> MatrixFunction<T> for InverseSchoenbergResidual<F, T> {
    fn variates(&self) -> usize {
        self.gamma.variates()
    }

    fn dim(&self) -> usize {
        self.gamma.dim()
    }

    fn eval(&self, i: usize, j: usize, h: &[T]) -> Result<T> {
        let x = self.t * self.gamma.eval(i, j, h)?;
        Ok(-(-x).exp_m1() / self.t)
    }
}

/// Entrywise `g ∘ γ` for any Bernstein `g`. Conditionally negative definite
/// when `γ` is, but a pseudo-variogram only if `g(0) = 0`.
#[derive(Clone, Debug)]
pub struct BernsteinComposition<F, T> {
    g: BernsteinSpec<T>,
    gamma: F,
}

pub fn bernstein_transform<T: Scalar, F: MatrixFunction<T>>(
    g: BernsteinSpec<T>,
    gamma: F,
) -> Result<BernsteinComposition<F, T>> {
    g.validate()?;
    Ok(BernsteinComposition { g, gamma })
}

impl<T: Scalar, F: MatrixFunction<T>> MatrixFunction<T> for BernsteinComposition<F, T> {
    fn variates(&self) -> usize {
        self.gamma.variates()
    }

    fn dim(&self) -> usize {
        self.gamma.dim()
    }

    fn eval(&self, i: usize, j: usize, h: &[T]) -> Result<T> {
        let v = non_negative_entry(i, j, self.gamma.eval(i, j, h)?)?;
        self.g.eval(v)
    }
}

/// `g ∘ γ` as a catalog pseudo-variogram; fails unless `g(0) = 0`.
pub fn bernstein_compose<T: Scalar>(
    g: BernsteinSpec<T>,
    gamma: PseudoVariogramModel<T>,
) -> Result<PseudoVariogramModel<T>> {
    PseudoVariogramModel::composed(g, gamma)
}

/// The kernel
/// `C_k(x, y)_ij = γ_ik(x) + γ_jk(y) - γ_ij(x - y) - [subtract_diagonal]·γ_kk(0)`.
#[derive(Clone, Debug)]
pub struct CkKernel<F> {
    gamma: F,
    k: usize,
    subtract_diagonal: bool,
}

pub fn build_ck_kernel<T: Scalar, F: MatrixFunction<T>>(
    gamma: F,
    k: usize,
    subtract_diagonal: bool,
) -> Result<CkKernel<F>> {
    if k >= gamma.variates() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: gamma.variates(),
        });
    }
    Ok(CkKernel {
        gamma,
        k,
        subtract_diagonal,
    })
}

impl<T: Scalar, F: MatrixFunction<T>> MatrixKernel<T> for CkKernel<F> {
    fn variates(&self) -> usize {
        self.gamma.variates()
    }

    fn dim(&self) -> usize {
        self.gamma.dim()
    }

    fn eval(&self, i: usize, j: usize, x: &[T], y: &[T]) -> Result<T> {
        let dim = self.gamma.dim();
        check_args(self.gamma.variates(), dim, i, j, x)?;
        if y.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: y.len(),
            });
        }
        let lag: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
        let mut v = self.gamma.eval(i, self.k, x)? + self.gamma.eval(j, self.k, y)? - self.gamma.eval(i, j, &lag)?;
        if self.subtract_diagonal {
            v -= self.gamma.eval(self.k, self.k, &vec![T::zero(); dim])?;
        }
        Ok(v)
    }
}

/// Searches `ts × configs` for a Schoenberg image that is not positive
/// semi-definite. `Some` is evidence that `γ` is not conditionally negative
/// definite.
pub fn search_schoenberg_violation<T: Scalar, F: MatrixFunction<T>>(
    gamma: &F,
    ts: &[T],
    configs: &[PointConfig<T>],
    tol: Tolerance<T>,
) -> Result<Option<(T, DefinitenessReport<T>)>> {
    for &t in ts {
        let map = schoenberg_map(gamma, t)?;
        for c in configs {
            let r = check_pd(&Stationary(&map), c, tol)?;
            if !r.passed() {
                return Ok(Some((t, r)));
            }
        }
    }
    Ok(None)
}
