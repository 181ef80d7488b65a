mod common;

use proptest::prelude::*;
use pseudovario::definiteness::{
    assemble_gamma_block, brute_force_qf_search, check_cnd, check_pd, check_sqrt_inequality, quadratic_form,
    Constraint, Tolerance, Verdict,
};
use pseudovario::estimate::{empirical_pseudo_variogram, GridLag};
use pseudovario::function::Stationary;
use pseudovario::models::{
    BernsteinSpec, EntryFormula, LmcFactor, PseudoVariogramModel, StationaryCovariance, UnivariateVariogram,
};
use pseudovario::points::PointConfig;
use pseudovario::simulate::FieldSample;
use pseudovario::transforms::schoenberg_map;
use pseudovario::MatrixFunction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn variogram() -> impl Strategy<Value = UnivariateVariogram<f64>> {
    (0.1..3.0f64, 0.1..=2.0f64).prop_map(|(c, a)| UnivariateVariogram::power(c, a).unwrap())
}

fn delays(m: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0..2.0f64, d), m)
}

fn lmc(m: usize, d: usize) -> impl Strategy<Value = PseudoVariogramModel<f64>> {
    let factor = (
        0.2..2.0f64,
        0.2..3.0f64,
        prop::collection::vec(-1.5..1.5f64, m),
        delays(m, d),
    )
        .prop_map(|(sill, range, loadings, delays)| LmcFactor {
            covariance: StationaryCovariance::exponential(sill, range).unwrap(),
            loadings,
            delays,
        });
    prop::collection::vec(factor, 1..=2).prop_map(|f| PseudoVariogramModel::delayed_lmc(f).unwrap())
}

fn bernstein() -> impl Strategy<Value = BernsteinSpec<f64>> {
    prop_oneof![
        (0.1..=1.0f64).prop_map(|alpha| BernsteinSpec::Power { alpha }),
        Just(BernsteinSpec::Log),
        (0.1..3.0f64).prop_map(|c| BernsteinSpec::BoundedExp { c }),
        (0.1..3.0f64).prop_map(|b| BernsteinSpec::Affine { a: 0.0, b }),
    ]
}

/// Valid models with `m, d <= 3`.
fn catalog_model() -> impl Strategy<Value = PseudoVariogramModel<f64>> {
    let base = (1..=3usize, 1..=3usize).prop_flat_map(|(m, d)| {
        prop_oneof![
            (variogram(), delays(m, d)).prop_map(|(v, t)| PseudoVariogramModel::shift(v, t).unwrap()),
            (variogram(), prop::collection::vec(0.0..2.0f64, m))
                .prop_map(move |(v, s)| PseudoVariogramModel::noisy_common(v, d, s).unwrap()),
            lmc(m, d),
        ]
    });
    prop_oneof![
        3 => base.clone(),
        1 => (bernstein(), base).prop_map(|(g, b)| PseudoVariogramModel::composed(g, b).unwrap()),
    ]
}

fn config(dim: usize, max_sites: usize) -> impl Strategy<Value = PointConfig<f64>> {
    prop::collection::vec(prop::collection::vec(-3.0..3.0f64, dim), 2..=max_sites)
        .prop_map(|p| PointConfig::new(p).unwrap())
}

fn model_and_config(max_order: usize) -> impl Strategy<Value = (PseudoVariogramModel<f64>, PointConfig<f64>)> {
    catalog_model().prop_flat_map(move |m| {
        let sites = (max_order / m.variates()).max(2);
        let c = config(m.dim(), sites);
        (Just(m), c)
    })
}

fn lag(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0..4.0f64, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn catalog_entries_are_admissible((m, h) in catalog_model().prop_flat_map(|m| { let d = m.dim(); (Just(m), lag(d)) })) {
        let origin = vec![0.0; m.dim()];
        let neg: Vec<f64> = h.iter().map(|x| -x).collect();
        for i in 0..m.variates() {
            prop_assert_eq!(m.eval(i, i, &origin).unwrap(), 0.0);
            for j in 0..m.variates() {
                let a = m.eval(i, j, &h).unwrap();
                let b = m.eval(j, i, &neg).unwrap();
                prop_assert!(a >= 0.0);
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn catalog_models_are_cnd((m, c) in model_and_config(24)) {
        let r = check_cnd(&m, &c, Tolerance::default()).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Pass, "{:?}", r);
    }

    #[test]
    fn sqrt_inequality_holds((m, lags) in catalog_model().prop_flat_map(|m| {
        let d = m.dim();
        (Just(m), prop::collection::vec(lag(d), 1..20))
    })) {
        prop_assert!(check_sqrt_inequality(&m, &lags).unwrap().passed());
    }

    #[test]
    fn schoenberg_images_are_psd((m, c) in model_and_config(24), t in 0.05..20.0f64) {
        let map = schoenberg_map(&m, t).unwrap();
        let r = check_pd(&Stationary(map), &c, Tolerance::default()).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
    }

    #[test]
    fn config_round_trip_is_bitwise(
        (m, args) in catalog_model().prop_flat_map(|m| {
            let (d, k) = (m.dim(), m.variates());
            (Just(m), prop::collection::vec((0..k, 0..k, lag(d)), 100))
        })
    ) {
        let text = serde_json::to_string(&m).unwrap();
        let back: PseudoVariogramModel<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &m);
        for (i, j, h) in args {
            prop_assert_eq!(m.eval(i, j, &h).unwrap().to_bits(), back.eval(i, j, &h).unwrap().to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn search_never_beats_projected_spectrum((m, c) in model_and_config(6), seed in any::<u64>()) {
        let eigen = check_cnd(&m, &c, Tolerance::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = brute_force_qf_search(&m, &c, Constraint::GlobalSum, 500, &mut rng).unwrap();
        prop_assert!(s.max <= eigen.extremal_eigenvalue + 1e-10 * eigen.tolerance.max(1.0));
        prop_assert!((s.argmax.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-9 || s.max == 0.0);
    }

    #[test]
    fn cubic_witnesses_are_valid(c in config(1, 8)) {
        let cubic = common::cubic();
        let r = check_cnd(&cubic, &c, Tolerance::default()).unwrap();
        if let Some(w) = r.witness {
            prop_assert_eq!(r.verdict, Verdict::Fail);
            prop_assert!(w.vector.iter().sum::<f64>().abs() <= 1e-9);
            let block = assemble_gamma_block(&cubic, &w.config).unwrap();
            let qf = quadratic_form(block.matrix(), &w.vector);
            prop_assert!((qf - w.quadratic_form).abs() <= 1e-9 * qf.abs().max(1.0));
            prop_assert!(qf > r.tolerance);
        } else {
            prop_assert_eq!(r.verdict, Verdict::Pass);
        }
    }

    #[test]
    fn estimator_symmetric_and_non_negative(
        data in prop::collection::vec(-5.0..5.0f64, 3 * 2 * 4 * 2),
        i in 0..2usize, j in 0..2usize, ds in -3..=3isize, dt in -1..=1isize,
    ) {
        let s = FieldSample::from_vec(3, 2, 4, 2, data).unwrap();
        let a = empirical_pseudo_variogram(&s, i, j, GridLag::new(ds, dt)).unwrap();
        let b = empirical_pseudo_variogram(&s, j, i, GridLag::new(-ds, -dt)).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}

#[test]
fn single_precision_checks() {
    let shift = PseudoVariogramModel::<f32>::shift(UnivariateVariogram::linear(), vec![vec![0.0], vec![1.0]]).unwrap();
    let c = PointConfig::<f32>::on_line(&[0.0, 0.4, 1.3, 2.0]).unwrap();
    assert!(check_cnd(&shift, &c, Tolerance::default()).unwrap().passed());

    let cubic = PseudoVariogramModel::<f32>::tabulated(1, vec![vec![EntryFormula::power(1.0, 3.0)]]).unwrap();
    let r = check_cnd(
        &cubic,
        &PointConfig::on_line(&[0.0, 1.0, 2.0]).unwrap(),
        Tolerance::default(),
    )
    .unwrap();
    let w = r.witness.unwrap();
    for (a, b) in w.vector.iter().zip([1.0f32, -2.0, 1.0]) {
        assert!((a - b).abs() < 1e-4);
    }
    assert!((w.quadratic_form - 8.0).abs() < 1e-3);
}
