//! Matrix-valued pseudo-variograms: validity checks, transforms to
//! covariance functions, Gneiting-type space-time models, simulation and
//! estimation.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix `f64`.

// `!(x >= 0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod definiteness;
pub mod error;
pub mod estimate;
pub mod function;
pub mod gneiting;
pub mod models;
pub mod points;
pub mod scalar;
pub mod simulate;
pub mod transforms;

pub use error::{Error, Result};
pub use function::{MatrixFunction, MatrixKernel};
pub use scalar::Scalar;

pub type PseudoVariogram = models::PseudoVariogramModel<f64>;
pub type Variogram = models::UnivariateVariogram<f64>;
pub type CompletelyMonotone = models::CompletelyMonotoneSpec<f64>;
pub type Bernstein = models::BernsteinSpec<f64>;
pub type Stieltjes = models::StieltjesSpec<f64>;
pub type Gneiting = gneiting::GneitingModel<f64>;
pub type Points = points::PointConfig<f64>;
pub type Report = definiteness::DefinitenessReport<f64>;
pub type Samples = simulate::FieldSample<f64>;
pub type Plan = simulate::SimulationPlan<f64>;
