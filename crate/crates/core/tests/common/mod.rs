//! Model catalogs shared by the integration tests.
#![allow(dead_code)]

use pseudovario::models::{
    BernsteinSpec, EntryFormula, LmcFactor, PseudoVariogramModel, StationaryCovariance, UnivariateVariogram,
};
use pseudovario::points::PointConfig;

pub type Model = PseudoVariogramModel<f64>;

pub fn power(c: f64, alpha: f64) -> UnivariateVariogram<f64> {
    UnivariateVariogram::power(c, alpha).unwrap()
}

pub fn line(xs: &[f64]) -> PointConfig<f64> {
    PointConfig::on_line(xs).unwrap()
}

pub fn shift01() -> Model {
    PseudoVariogramModel::shift(UnivariateVariogram::linear(), vec![vec![0.0], vec![1.0]]).unwrap()
}

pub fn noisy() -> Model {
    PseudoVariogramModel::noisy_common(UnivariateVariogram::linear(), 1, vec![1.0, 0.5]).unwrap()
}

fn lmc_1d() -> Model {
    PseudoVariogramModel::delayed_lmc(vec![
        LmcFactor {
            covariance: StationaryCovariance::exponential(1.0, 1.0).unwrap(),
            loadings: vec![1.0, 0.5],
            delays: vec![vec![0.0], vec![0.5]],
        },
        LmcFactor {
            covariance: StationaryCovariance::exponential(0.5, 2.0).unwrap(),
            loadings: vec![0.3, 1.0],
            delays: vec![vec![0.0], vec![-1.0]],
        },
    ])
    .unwrap()
}

fn lmc_2d() -> Model {
    PseudoVariogramModel::delayed_lmc(vec![LmcFactor {
        covariance: StationaryCovariance::exponential(2.0, 1.5).unwrap(),
        loadings: vec![1.0, -0.7, 0.4],
        delays: vec![vec![0.0, 0.0], vec![0.3, -0.2], vec![-1.0, 0.5]],
    }])
    .unwrap()
}

/// Valid models with up to three variates on spaces of dimension up to three.
pub fn catalog() -> Vec<(&'static str, Model)> {
    let shift_2d =
        PseudoVariogramModel::shift(power(0.7, 1.5), vec![vec![0.0, 0.0], vec![0.5, -0.5], vec![1.0, 0.25]]).unwrap();
    let shift_3d =
        PseudoVariogramModel::shift(power(1.2, 0.5), vec![vec![0.0, 0.0, 0.0], vec![0.2, 0.4, -0.3]]).unwrap();
    let uni = PseudoVariogramModel::shift(power(1.0, 2.0), vec![vec![0.0]]).unwrap();
    let noisy_2d = PseudoVariogramModel::noisy_common(power(0.5, 1.8), 2, vec![0.3, 0.2, 0.0]).unwrap();
    vec![
        ("shift-1d", shift01()),
        ("shift-2d", shift_2d),
        ("shift-3d", shift_3d),
        ("univariate-quadratic", uni),
        ("noisy-1d", noisy()),
        ("noisy-2d", noisy_2d.clone()),
        ("lmc-1d", lmc_1d()),
        ("lmc-2d", lmc_2d()),
        (
            "log-of-shift",
            PseudoVariogramModel::composed(BernsteinSpec::Log, shift01()).unwrap(),
        ),
        (
            "sqrt-of-noisy",
            PseudoVariogramModel::composed(BernsteinSpec::Power { alpha: 0.5 }, noisy_2d).unwrap(),
        ),
        (
            "bounded-of-lmc",
            PseudoVariogramModel::composed(BernsteinSpec::BoundedExp { c: 2.0 }, lmc_1d()).unwrap(),
        ),
        (
            "affine-of-shift",
            PseudoVariogramModel::composed(BernsteinSpec::Affine { a: 0.0, b: 2.0 }, shift01()).unwrap(),
        ),
    ]
}

/// `|h|³`: not conditionally negative definite.
pub fn cubic() -> Model {
    PseudoVariogramModel::tabulated(1, vec![vec![EntryFormula::power(1.0, 3.0)]]).unwrap()
}

/// `γ_ii = |h|`, `γ_12 = γ_21 = -|h|`.
pub fn negative_cross() -> Model {
    PseudoVariogramModel::tabulated(
        1,
        vec![
            vec![EntryFormula::power(1.0, 1.0), EntryFormula::power(-1.0, 1.0)],
            vec![EntryFormula::power(-1.0, 1.0), EntryFormula::power(1.0, 1.0)],
        ],
    )
    .unwrap()
}

pub fn adversarial() -> Vec<(&'static str, Model)> {
    vec![("cubic", cubic()), ("negative-cross", negative_cross())]
}
