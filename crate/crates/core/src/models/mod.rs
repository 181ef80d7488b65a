//! Model catalogs.
//!
//! Every [`PseudoVariogramModel`] variant except `Tabulated` is valid by an
//! explicit Gaussian construction:
//!
//! * `Shift`: `Z_i(x) = W(x + τ_i)` for one intrinsic field `W` with variogram `γ0`.
//! * `NoisyCommon`: `Z_i(x) = W(x) + ε_i(x)` with independent white noise `ε_i`.
//! * `DelayedLmc`: `Z_i(x) = Σ_k A_ik Y_k(x + τ_ik)` with independent stationary `Y_k`.
//! * `Composed`: a Bernstein function with `g(0) = 0` applied entrywise.
//!
//! `Tabulated` holds explicit entry formulas and exists to feed adversarial
//! candidates to the definiteness checks.

mod pseudo;
mod scalar_fns;
mod variogram;

pub use pseudo::{EntryFormula, LmcFactor, PseudoVariogramModel};
pub use scalar_fns::{
    BernsteinRepresentation, BernsteinSpec, CompletelyMonotoneSpec, LaplaceMeasure, LevyMeasure, StieltjesDensity,
    StieltjesSpec,
};
pub use variogram::{StationaryCovariance, UnivariateVariogram};
