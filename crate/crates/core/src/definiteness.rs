//! Finite-configuration definiteness tests.
//!
//! All tests assemble the `nm × nm` block matrix of a matrix-valued function
//! over a [`PointConfig`] and inspect the spectrum of that matrix after
//! projecting onto the admissible test vectors:
//!
//! * conditional negative definiteness: vectors `a ∈ R^{nm}` with `1ᵀa = 0`
//!   (the total of all components vanishes);
//! * almost negative definiteness: each of the `m` per-component sums vanishes;
//! * positive definiteness: no constraint.
//!
//! A finite configuration can only falsify these properties. A passing
//! report is evidence for the configurations supplied, not a proof.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::function::{MatrixFunction, MatrixKernel, Stationary};
use crate::points::PointConfig;
use crate::scalar::Scalar;

const EIGEN_MAX_ITER: usize = 10_000;

/// Linear constraint imposed on test vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    /// `1ᵀa = 0` over all `nm` coordinates.
    GlobalSum,
    /// `Σ_k a_k = 0 ∈ R^m`.
    PerComponentSum,
    None,
}

impl std::fmt::Display for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::GlobalSum => "global-sum",
            Self::PerComponentSum => "per-component-sum",
            Self::None => "none",
        })
    }
}

/// Eigenvalue slack.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance<T> {
    /// `rel · max(1, max |M_ij|)`.
    Relative(T),
    Absolute(T),
}

impl<T: Scalar> Default for Tolerance<T> {
    fn default() -> Self {
        Self::Relative(T::lit(T::DEFAULT_REL_TOL))
    }
}

impl<T: Scalar> Tolerance<T> {
    pub fn resolve(&self, matrix: &DMatrix<T>) -> T {
        match *self {
            Self::Relative(rel) => rel * max_abs(matrix).max(T::one()),
            Self::Absolute(abs) => abs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The eigensolver did not converge.
    Inconclusive,
}

/// A test vector certifying a violation.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness<T: Scalar> {
    pub config: PointConfig<T>,
    /// Stacked `(a_1, …, a_n)`, site-major.
    pub vector: Vec<T>,
    pub constraint: Constraint,
    /// `aᵀMa`.
    pub quadratic_form: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Failure<T> {
    /// `γ_ii(0) ≠ 0`.
    DiagonalAtOrigin { component: usize, value: T },
    /// A test vector violates the quadratic-form inequality; see the witness.
    QuadraticForm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefinitenessReport<T: Scalar> {
    pub verdict: Verdict,
    /// Largest projected eigenvalue for negative-definiteness tests, smallest
    /// eigenvalue for positive-definiteness tests.
    pub extremal_eigenvalue: T,
    /// `(min, max)` of the projected spectrum, over all configs checked.
    pub eigenvalue_range: (T, T),
    pub tolerance: T,
    pub witness: Option<Witness<T>>,
    pub failure: Option<Failure<T>>,
    pub configs_checked: usize,
}

impl<T: Scalar> DefinitenessReport<T> {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// `M[(i,p),(j,q)] = γ_pq(x_i - x_j)`, index `i·m + p`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaBlockMatrix<T: Scalar> {
    matrix: DMatrix<T>,
    sites: usize,
    variates: usize,
}

impl<T: Scalar> GammaBlockMatrix<T> {
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn variates(&self) -> usize {
        self.variates
    }
}

fn max_abs<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Fails if `max |M - Mᵀ| > slack·max(1, ‖M‖_max)`, with slack `1e-10` in
/// double precision.
pub fn assert_symmetric<T: Scalar>(m: &DMatrix<T>) -> Result<()> {
    let threshold = T::lit(T::SYMMETRY_SLACK) * max_abs(m).max(T::one());
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if worst > threshold || !worst.is_finite() {
        return Err(Error::SymmetryViolation {
            asymmetry: worst.as_f64(),
            threshold: threshold.as_f64(),
        });
    }
    Ok(())
}

/// Block matrix `K[(i,p),(j,q)] = k_pq(x_i, x_j)` of a kernel; asserts symmetry.
pub fn assemble_kernel_block<T: Scalar, K: MatrixKernel<T> + ?Sized>(
    kernel: &K,
    config: &PointConfig<T>,
) -> Result<DMatrix<T>> {
    if config.dim() != kernel.dim() {
        return Err(Error::DimensionMismatch {
            expected: kernel.dim(),
            got: config.dim(),
        });
    }
    let (n, m) = (config.len(), kernel.variates());
    let mut out = DMatrix::zeros(n * m, n * m);
    for i in 0..n {
        for j in 0..n {
            for p in 0..m {
                for q in 0..m {
                    let v = kernel.eval(p, q, config.point(i), config.point(j))?;
                    if !v.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "non-finite kernel value at sites ({i}, {j}), entry ({p}, {q})"
                        )));
                    }
                    out[(i * m + p, j * m + q)] = v;
                }
            }
        }
    }
    assert_symmetric(&out)?;
    Ok(out)
}

pub fn assemble_gamma_block<T: Scalar, F: MatrixFunction<T> + ?Sized>(
    gamma: &F,
    config: &PointConfig<T>,
) -> Result<GammaBlockMatrix<T>> {
    let matrix = assemble_kernel_block(&Stationary(gamma), config)?;
    Ok(GammaBlockMatrix {
        matrix,
        sites: config.len(),
        variates: gamma.variates(),
    })
}

/// `P = I - (1/(nm))·11ᵀ`.
pub fn global_projector<T: Scalar>(sites: usize, variates: usize) -> DMatrix<T> {
    let k = sites * variates;
    let c = T::one() / T::lit(k as f64);
    DMatrix::from_fn(k, k, |r, s| if r == s { T::one() - c } else { -c })
}

/// `Q = I - (1/n)·(1_n 1_nᵀ ⊗ I_m)`: centers each component across sites.
pub fn component_projector<T: Scalar>(sites: usize, variates: usize) -> DMatrix<T> {
    let k = sites * variates;
    let c = T::one() / T::lit(sites as f64);
    DMatrix::from_fn(k, k, |r, s| {
        let same = if r % variates == s % variates { c } else { T::zero() };
        if r == s {
            T::one() - same
        } else {
            -same
        }
    })
}

pub fn projector<T: Scalar>(constraint: Constraint, sites: usize, variates: usize) -> DMatrix<T> {
    match constraint {
        Constraint::GlobalSum => global_projector(sites, variates),
        Constraint::PerComponentSum => component_projector(sites, variates),
        Constraint::None => DMatrix::identity(sites * variates, sites * variates),
    }
}

pub fn quadratic_form<T: Scalar>(m: &DMatrix<T>, a: &[T]) -> T {
    let n = a.len();
    let mut acc = T::zero();
    for j in 0..n {
        let col = m.column(j);
        let mut inner = T::zero();
        for i in 0..n {
            inner += a[i] * col[i];
        }
        acc += inner * a[j];
    }
    acc
}

fn symmetric_eigen<T: Scalar>(m: DMatrix<T>) -> Option<SymmetricEigen<T, nalgebra::Dyn>> {
    let sym = (&m + m.transpose()) * T::lit(0.5);
    SymmetricEigen::try_new(sym, T::default_epsilon(), EIGEN_MAX_ITER)
}

/// Projects `v`, then scales it so that its first non-negligible coordinate
/// equals `+1` and projects once more to clear rounding.
fn normalize_witness<T: Scalar>(v: &DVector<T>, proj: &DMatrix<T>) -> Vec<T> {
    let mut w = proj * v;
    let big = w.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    if big > T::zero() {
        let cutoff = big * T::lit(1e-9);
        if let Some(&lead) = w.iter().find(|x| x.abs() > cutoff) {
            w /= lead;
        }
        w = proj * w;
    }
    w.iter().copied().collect()
}

fn inconclusive<T: Scalar>(tol: T) -> DefinitenessReport<T> {
    DefinitenessReport {
        verdict: Verdict::Inconclusive,
        extremal_eigenvalue: T::zero(),
        eigenvalue_range: (T::zero(), T::zero()),
        tolerance: tol,
        witness: None,
        failure: None,
        configs_checked: 1,
    }
}

/// Negative-definiteness test of `m` over vectors admitted by `constraint`.
fn projected_nd_check<T: Scalar>(
    block: &GammaBlockMatrix<T>,
    config: &PointConfig<T>,
    constraint: Constraint,
    tol: Tolerance<T>,
) -> DefinitenessReport<T> {
    let m = block.matrix();
    let tol = tol.resolve(m);
    let proj = projector::<T>(constraint, block.sites, block.variates);
    let Some(eig) = symmetric_eigen(&proj * m * &proj) else {
        return inconclusive(tol);
    };
    let (imax, &lmax) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonempty spectrum");
    let lmin = eig.eigenvalues.min();
    let mut report = DefinitenessReport {
        verdict: Verdict::Pass,
        extremal_eigenvalue: lmax,
        eigenvalue_range: (lmin, lmax),
        tolerance: tol,
        witness: None,
        failure: None,
        configs_checked: 1,
    };
    if lmax > tol {
        let vector = normalize_witness(&eig.eigenvectors.column(imax).into_owned(), &proj);
        let qf = quadratic_form(m, &vector);
        report.verdict = Verdict::Fail;
        report.failure = Some(Failure::QuadraticForm);
        report.witness = Some(Witness {
            config: config.clone(),
            vector,
            constraint,
            quadratic_form: qf,
        });
    }
    report
}

/// Conditional negative definiteness on one configuration.
pub fn check_cnd<T: Scalar, F: MatrixFunction<T> + ?Sized>(
    gamma: &F,
    config: &PointConfig<T>,
    tol: Tolerance<T>,
) -> Result<DefinitenessReport<T>> {
    let block = assemble_gamma_block(gamma, config)?;
    Ok(projected_nd_check(&block, config, Constraint::GlobalSum, tol))
}

/// Almost negative definiteness (per-component constraint) on one configuration.
pub fn check_almost_nd<T: Scalar, F: MatrixFunction<T> + ?Sized>(
    gamma: &F,
    config: &PointConfig<T>,
    tol: Tolerance<T>,
) -> Result<DefinitenessReport<T>> {
    let block = assemble_gamma_block(gamma, config)?;
    Ok(projected_nd_check(&block, config, Constraint::PerComponentSum, tol))
}

/// Positive semi-definiteness of the kernel's block matrix on one configuration.
pub fn check_pd<T: Scalar, K: MatrixKernel<T> + ?Sized>(
    kernel: &K,
    config: &PointConfig<T>,
    tol: Tolerance<T>,
) -> Result<DefinitenessReport<T>> {
    let m = assemble_kernel_block(kernel, config)?;
    Ok(pd_check_matrix(&m, config, tol))
}

/// Positive semi-definiteness of an already assembled symmetric matrix.
pub fn pd_check_matrix<T: Scalar>(m: &DMatrix<T>, config: &PointConfig<T>, tol: Tolerance<T>) -> DefinitenessReport<T> {
    let tol = tol.resolve(m);
    let Some(eig) = symmetric_eigen(m.clone()) else {
        return inconclusive(tol);
    };
    let (imin, &lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonempty spectrum");
    let lmax = eig.eigenvalues.max();
    let mut report = DefinitenessReport {
        verdict: Verdict::Pass,
        extremal_eigenvalue: lmin,
        eigenvalue_range: (lmin, lmax),
        tolerance: tol,
        witness: None,
        failure: None,
        configs_checked: 1,
    };
    if lmin < -tol {
        let id = DMatrix::identity(m.nrows(), m.ncols());
        let vector = normalize_witness(&eig.eigenvectors.column(imin).into_owned(), &id);
        let qf = quadratic_form(m, &vector);
        report.verdict = Verdict::Fail;
        report.failure = Some(Failure::QuadraticForm);
        report.witness = Some(Witness {
            config: config.clone(),
            vector,
            constraint: Constraint::None,
            quadratic_form: qf,
        });
    }
    report
}

/// Folds per-config reports: the first failure wins, otherwise the spectra merge.
fn merge_reports<T: Scalar>(
    reports: impl IntoIterator<Item = DefinitenessReport<T>>,
    pick_max: bool,
) -> Option<DefinitenessReport<T>> {
    let mut acc: Option<DefinitenessReport<T>> = None;
    for r in reports {
        if r.verdict != Verdict::Pass {
            let checked = acc.as_ref().map_or(0, |a| a.configs_checked) + 1;
            return Some(DefinitenessReport {
                configs_checked: checked,
                ..r
            });
        }
        acc = Some(match acc {
            None => r,
            Some(a) => {
                let extremal = if pick_max {
                    a.extremal_eigenvalue.max(r.extremal_eigenvalue)
                } else {
                    a.extremal_eigenvalue.min(r.extremal_eigenvalue)
                };
                DefinitenessReport {
                    extremal_eigenvalue: extremal,
                    eigenvalue_range: (
                        a.eigenvalue_range.0.min(r.eigenvalue_range.0),
                        a.eigenvalue_range.1.max(r.eigenvalue_range.1),
                    ),
                    tolerance: a.tolerance.max(r.tolerance),
                    configs_checked: a.configs_checked + 1,
                    ..a
                }
            }
        });
    }
    acc
}

/// `γ_ii(0) = 0` for every `i` (within the exact slack) and conditional
/// negative definiteness on every supplied configuration.
///
/// This is a falsifier: passing only certifies the configurations given.
pub fn check_pseudo_variogram<T: Scalar, F: MatrixFunction<T> + ?Sized>(
    gamma: &F,
    configs: &[PointConfig<T>],
    tol: Tolerance<T>,
) -> Result<DefinitenessReport<T>> {
    let origin = vec![T::zero(); gamma.dim()];
    for i in 0..gamma.variates() {
        let v = gamma.eval(i, i, &origin)?;
        if v.abs() > T::lit(T::EXACT_SLACK) {
            return Ok(DefinitenessReport {
                verdict: Verdict::Fail,
                extremal_eigenvalue: T::zero(),
                eigenvalue_range: (T::zero(), T::zero()),
                tolerance: T::lit(T::EXACT_SLACK),
                witness: None,
                failure: Some(Failure::DiagonalAtOrigin { component: i, value: v }),
                configs_checked: 0,
            });
        }
    }
    let mut reports = Vec::with_capacity(configs.len());
    for c in configs {
        let r = check_cnd(gamma, c, tol)?;
        let stop = r.verdict != Verdict::Pass;
        reports.push(r);
        if stop {
            break;
        }
    }
    Ok(merge_reports(reports, true).unwrap_or(DefinitenessReport {
        verdict: Verdict::Pass,
        extremal_eigenvalue: T::zero(),
        eigenvalue_range: (T::zero(), T::zero()),
        tolerance: T::zero(),
        witness: None,
        failure: None,
        configs_checked: 0,
    }))
}

/// Positive definiteness over several configurations.
pub fn check_pd_all<T: Scalar, K: MatrixKernel<T> + ?Sized>(
    kernel: &K,
    configs: &[PointConfig<T>],
    tol: Tolerance<T>,
) -> Result<Option<DefinitenessReport<T>>> {
    let mut reports = Vec::with_capacity(configs.len());
    for c in configs {
        let r = check_pd(kernel, c, tol)?;
        let stop = r.verdict != Verdict::Pass;
        reports.push(r);
        if stop {
            break;
        }
    }
    Ok(merge_reports(reports, false))
}

#[derive(Clone, Debug, PartialEq)]
pub enum SqrtOutcome<T> {
    Holds,
    /// `(√γ_ii(h) - √γ_ij(h))² > γ_ij(0) + slack`.
    Violated {
        i: usize,
        j: usize,
        lag: Vec<T>,
    },
    /// A tested entry was negative, so the square roots are undefined.
    NegativeEntry {
        i: usize,
        j: usize,
        lag: Vec<T>,
        value: T,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SqrtInequalityReport<T> {
    pub outcome: SqrtOutcome<T>,
    /// `min over (i, j, h)` of `γ_ij(0) - (√γ_ii(h) - √γ_ij(h))²`.
    pub worst_margin: T,
}

impl<T> SqrtInequalityReport<T> {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, SqrtOutcome::Holds)
    }
}

/// Checks `(√γ_ii(h) - √γ_ij(h))² ≤ γ_ij(0)` with slack `1e-12` at every
/// lag and every ordered pair.
pub fn check_sqrt_inequality<T: Scalar, F: MatrixFunction<T> + ?Sized>(
    gamma: &F,
    lags: &[Vec<T>],
) -> Result<SqrtInequalityReport<T>> {
    let m = gamma.variates();
    let origin = vec![T::zero(); gamma.dim()];
    let slack = T::lit(T::EXACT_SLACK);
    let mut worst_margin: Option<T> = None;
    let mut outcome = SqrtOutcome::Holds;
    for h in lags {
        for i in 0..m {
            let gii = gamma.eval(i, i, h)?;
            for j in 0..m {
                let gij = gamma.eval(i, j, h)?;
                let gij0 = gamma.eval(i, j, &origin)?;
                for (v, a, b) in [(gii, i, i), (gij, i, j), (gij0, i, j)] {
                    if v < T::zero() {
                        return Ok(SqrtInequalityReport {
                            outcome: SqrtOutcome::NegativeEntry {
                                i: a,
                                j: b,
                                lag: h.clone(),
                                value: v,
                            },
                            worst_margin: worst_margin.unwrap_or(v),
                        });
                    }
                }
                let d = gii.sqrt() - gij.sqrt();
                let margin = gij0 - d * d;
                if worst_margin.is_none_or(|w| margin < w) {
                    worst_margin = Some(margin);
                }
                if margin < -slack && outcome == SqrtOutcome::Holds {
                    outcome = SqrtOutcome::Violated { i, j, lag: h.clone() };
                }
            }
        }
    }
    Ok(SqrtInequalityReport {
        outcome,
        worst_margin: worst_margin.unwrap_or_else(T::zero),
    })
}

/// Why a function is outside the pseudo-variogram or cross-variogram set.
#[derive(Clone, Debug, PartialEq)]
pub enum MembershipFailure<T: Scalar> {
    NotPseudoVariogram(Box<DefinitenessReport<T>>),
    /// Cross-variograms vanish at the origin.
    CrossNonzeroAtOrigin {
        i: usize,
        j: usize,
        value: T,
    },
    /// Cross-variograms are even: `γ_ij(h) = γ_ij(-h)`.
    CrossNotEven {
        i: usize,
        j: usize,
        lag: Vec<T>,
    },
    /// Cross-variograms are symmetric: `γ_ij(h) = γ_ji(h)`.
    CrossNotSymmetric {
        i: usize,
        j: usize,
        lag: Vec<T>,
    },
    CrossNotAlmostNegativeDefinite(Box<DefinitenessReport<T>>),
}

impl<T: Scalar> MembershipFailure<T> {
    /// `"pseudo-variogram"` or `"cross-variogram"`.
    pub fn membership(&self) -> &'static str {
        match self {
            Self::NotPseudoVariogram(_) => "pseudo-variogram",
            _ => "cross-variogram",
        }
    }
}

impl<T: Scalar> std::fmt::Display for MembershipFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NotPseudoVariogram(_) => write!(f, "not a pseudo-variogram"),
            Self::CrossNonzeroAtOrigin { i, j, value } => {
                write!(
                    f,
                    "cross-variogram membership fails: gamma_{}{}(0) = {value} != 0",
                    i + 1,
                    j + 1
                )
            }
            Self::CrossNotEven { i, j, lag } => {
                write!(
                    f,
                    "cross-variogram membership fails: gamma_{}{} not even at lag {lag:?}",
                    i + 1,
                    j + 1
                )
            }
            Self::CrossNotSymmetric { i, j, lag } => write!(
                f,
                "cross-variogram membership fails: gamma_{}{} != gamma_{}{} at lag {lag:?}",
                i + 1,
                j + 1,
                j + 1,
                i + 1
            ),
            Self::CrossNotAlmostNegativeDefinite(_) => {
                write!(f, "cross-variogram membership fails: not almost negative definite")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum IntersectionVerdict<T: Scalar> {
    /// Both memberships hold and every entry equals `γ_11`.
    Trivial {
        max_deviation: T,
    },
    NotInIntersection {
        failures: Vec<MembershipFailure<T>>,
    },
    /// Both memberships hold on the probes but the entries differ.
    Nontrivial {
        max_deviation: T,
    },
}

impl<T: Scalar> IntersectionVerdict<T> {
    pub fn in_intersection(&self) -> bool {
        !matches!(self, Self::NotInIntersection { .. })
    }
}

/// Membership in both the pseudo- and the cross-variogram sets, and if both
/// hold, that `γ = 1 1ᵀ γ_11` on all probe lags (pairwise differences of the
/// configurations).
pub fn check_intersection_triviality<T: Scalar, F: MatrixFunction<T> + ?Sized>(
    gamma: &F,
    configs: &[PointConfig<T>],
    tol: Tolerance<T>,
) -> Result<IntersectionVerdict<T>> {
    let m = gamma.variates();
    let dim = gamma.dim();
    let slack = T::lit(T::EXACT_SLACK);
    let close = |a: T, b: T| (a - b).abs() <= slack * a.abs().max(b.abs()).max(T::one());
    let mut failures = Vec::new();

    let pseudo = check_pseudo_variogram(gamma, configs, tol)?;
    if !pseudo.passed() {
        failures.push(MembershipFailure::NotPseudoVariogram(Box::new(pseudo)));
    }

    let origin = vec![T::zero(); dim];
    'origin: for i in 0..m {
        for j in 0..m {
            let v = gamma.eval(i, j, &origin)?;
            if v.abs() > slack {
                failures.push(MembershipFailure::CrossNonzeroAtOrigin { i, j, value: v });
                break 'origin;
            }
        }
    }

    let lags: Vec<Vec<T>> = configs.iter().flat_map(PointConfig::pairwise_lags).collect();
    let (mut even_ok, mut sym_ok) = (true, true);
    for h in &lags {
        let neg: Vec<T> = h.iter().map(|&x| -x).collect();
        for i in 0..m {
            for j in 0..m {
                let v = gamma.eval(i, j, h)?;
                if even_ok && !close(v, gamma.eval(i, j, &neg)?) {
                    failures.push(MembershipFailure::CrossNotEven { i, j, lag: h.clone() });
                    even_ok = false;
                }
                if sym_ok && !close(v, gamma.eval(j, i, h)?) {
                    failures.push(MembershipFailure::CrossNotSymmetric { i, j, lag: h.clone() });
                    sym_ok = false;
                }
            }
        }
    }

    for c in configs {
        let r = check_almost_nd(gamma, c, tol)?;
        if !r.passed() {
            failures.push(MembershipFailure::CrossNotAlmostNegativeDefinite(Box::new(r)));
            break;
        }
    }

    if !failures.is_empty() {
        return Ok(IntersectionVerdict::NotInIntersection { failures });
    }

    let mut max_deviation = T::zero();
    for h in lags.iter().chain(std::iter::once(&origin)) {
        let g11 = gamma.eval(0, 0, h)?;
        for i in 0..m {
            for j in 0..m {
                max_deviation = max_deviation.max((gamma.eval(i, j, h)? - g11).abs());
            }
        }
    }
    Ok(if max_deviation <= slack {
        IntersectionVerdict::Trivial { max_deviation }
    } else {
        IntersectionVerdict::Nontrivial { max_deviation }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QfSearchResult<T> {
    /// Largest `aᵀMa` over unit-norm admissible samples.
    pub max: T,
    pub argmax: Vec<T>,
}

/// Random search for the largest normalized quadratic form over admissible
/// test vectors. Independent of the eigen route: it only evaluates `aᵀMa`.
pub fn brute_force_qf_search<T: Scalar, F: MatrixFunction<T> + ?Sized, R: Rng + ?Sized>(
    gamma: &F,
    config: &PointConfig<T>,
    constraint: Constraint,
    trials: usize,
    rng: &mut R,
) -> Result<QfSearchResult<T>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let block = assemble_gamma_block(gamma, config)?;
    let m = block.matrix();
    let (n, k) = (block.sites, block.variates);
    let dim = n * k;
    let mut best: Option<QfSearchResult<T>> = None;
    let mut a = vec![T::zero(); dim];
    for _ in 0..trials {
        for x in a.iter_mut() {
            *x = T::lit(rng.sample::<f64, _>(StandardNormal));
        }
        match constraint {
            Constraint::GlobalSum => {
                let mean = a.iter().fold(T::zero(), |s, &x| s + x) / T::lit(dim as f64);
                a.iter_mut().for_each(|x| *x -= mean);
            }
            Constraint::PerComponentSum => {
                for p in 0..k {
                    let mean = (0..n).fold(T::zero(), |s, i| s + a[i * k + p]) / T::lit(n as f64);
                    (0..n).for_each(|i| a[i * k + p] -= mean);
                }
            }
            Constraint::None => {}
        }
        let norm = crate::scalar::norm(&a);
        let qf = if norm > T::lit(1e-12) {
            a.iter_mut().for_each(|x| *x /= norm);
            quadratic_form(m, &a)
        } else {
            // admissible space is {0}
            a.iter_mut().for_each(|x| *x = T::zero());
            T::zero()
        };
        if best.as_ref().is_none_or(|b| qf > b.max) {
            best = Some(QfSearchResult {
                max: qf,
                argmax: a.clone(),
            });
        }
    }
    Ok(best.expect("trials >= 1"))
}

/// Probe configurations: lattices `{0, …, n-1}·e_1` for `n = 2, 3, 4`, then
/// `random` configurations of 2 to `max_sites` uniform sites in `[-3, 3]^dim`.
pub fn probe_configs<T: Scalar, R: Rng + ?Sized>(
    dim: usize,
    random: usize,
    max_sites: usize,
    rng: &mut R,
) -> Result<Vec<PointConfig<T>>> {
    let mut out = Vec::with_capacity(random + 3);
    for n in 2..=4 {
        out.push(PointConfig::lattice(n, dim)?);
    }
    for _ in 0..random {
        let n = rng.random_range(2..=max_sites.max(2));
        out.push(PointConfig::random(n, dim, 3.0, rng)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::ConstantFunction;
    use crate::models::{EntryFormula, PseudoVariogramModel, UnivariateVariogram};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shift01() -> PseudoVariogramModel<f64> {
        PseudoVariogramModel::shift(UnivariateVariogram::linear(), vec![vec![0.0], vec![1.0]]).unwrap()
    }

    fn cubic() -> PseudoVariogramModel<f64> {
        PseudoVariogramModel::tabulated(1, vec![vec![EntryFormula::power(1.0, 3.0)]]).unwrap()
    }

    fn line(xs: &[f64]) -> PointConfig<f64> {
        PointConfig::on_line(xs).unwrap()
    }

    #[test]
    fn shift_block_matrix_by_hand() {
        let b = assemble_gamma_block(&shift01(), &line(&[0.0, 1.0])).unwrap();
        let expected = DMatrix::from_row_slice(4, 4, &[0., 1., 1., 2., 1., 0., 0., 1., 1., 0., 0., 1., 2., 1., 1., 0.]);
        assert_eq!(b.matrix(), &expected);
    }

    #[test]
    fn zero_function_block_is_zero() {
        let z = PseudoVariogramModel::<f64>::zero(2, 3);
        let cfg = PointConfig::new(vec![vec![0.0, 1.0], vec![2.0, -1.0]]).unwrap();
        let b = assemble_gamma_block(&z, &cfg).unwrap();
        assert!(b.matrix().iter().all(|&x| x == 0.0));
        let r = check_cnd(&z, &cfg, Tolerance::default()).unwrap();
        assert!(r.passed());
        assert_eq!(r.extremal_eigenvalue.abs(), 0.0);
    }

    #[test]
    fn odd_cross_entry_is_symmetric_but_negative() {
        let g = PseudoVariogramModel::tabulated(
            1,
            vec![
                vec![EntryFormula::power(1.0, 1.0), EntryFormula::odd(1.0, 1.0)],
                vec![EntryFormula::odd(-1.0, 1.0), EntryFormula::power(1.0, 1.0)],
            ],
        )
        .unwrap();
        let b = assemble_gamma_block(&g, &line(&[0.0, 1.0])).unwrap();
        assert_eq!(b.matrix()[(0, 3)], -1.0);
    }

    #[test]
    fn asymmetric_candidate_rejected() {
        let g = PseudoVariogramModel::tabulated(
            1,
            vec![
                vec![EntryFormula::power(1.0, 1.0), EntryFormula::odd(1.0, 1.0)],
                vec![EntryFormula::odd(1.0, 1.0), EntryFormula::power(1.0, 1.0)],
            ],
        )
        .unwrap();
        let r = assemble_gamma_block(&g, &line(&[0.0, 1.0]));
        assert!(matches!(r, Err(Error::SymmetryViolation { .. })));
    }

    #[test]
    fn shift_passes_cnd() {
        let r = check_cnd(&shift01(), &line(&[0.0, 0.5, 1.0, 2.0]), Tolerance::default()).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn cubic_fails_with_known_witness() {
        let r = check_cnd(&cubic(), &line(&[0.0, 1.0, 2.0]), Tolerance::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let w = r.witness.unwrap();
        for (a, b) in w.vector.iter().zip([1.0, -2.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((w.quadratic_form - 8.0).abs() < 1e-10);
        assert!((r.extremal_eigenvalue - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn negative_cross_entry_separates_the_two_notions() {
        let g = PseudoVariogramModel::tabulated(
            1,
            vec![
                vec![EntryFormula::power(1.0, 1.0), EntryFormula::power(-1.0, 1.0)],
                vec![EntryFormula::power(-1.0, 1.0), EntryFormula::power(1.0, 1.0)],
            ],
        )
        .unwrap();
        let cfg = line(&[0.0, 1.0]);
        assert!(check_almost_nd(&g, &cfg, Tolerance::default()).unwrap().passed());
        let r = check_cnd(&g, &cfg, Tolerance::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let w = r.witness.unwrap();
        assert!(w.quadratic_form > 1.0);
        assert!(w.vector.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn projectors_are_idempotent() {
        for (n, m) in [(1, 1), (3, 2), (5, 3), (8, 3)] {
            for p in [global_projector::<f64>(n, m), component_projector::<f64>(n, m)] {
                let d = &p * &p - &p;
                assert!(d.iter().all(|x| x.abs() <= 1e-14));
            }
        }
    }

    #[test]
    fn pd_examples() {
        let ones = ConstantFunction {
            value: DMatrix::from_element(2, 2, 1.0),
            dim: 1,
        };
        assert!(
            check_pd(&Stationary(&ones), &line(&[0.0, 0.3, 2.0]), Tolerance::default())
                .unwrap()
                .passed()
        );
        let bad = ConstantFunction {
            value: DMatrix::from_row_slice(2, 2, &[1.0, 1.5, 1.5, 1.0]),
            dim: 1,
        };
        let r = check_pd(&Stationary(&bad), &line(&[0.0]), Tolerance::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!((r.extremal_eigenvalue + 0.5).abs() < 1e-12);
        assert!(r.witness.unwrap().quadratic_form < 0.0);
    }

    #[test]
    fn diagonal_gate() {
        let g = PseudoVariogramModel::tabulated(1, vec![vec![EntryFormula::constant(0.1)]]).unwrap();
        let r = check_pseudo_variogram(&g, &[line(&[0.0, 1.0])], Tolerance::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(matches!(
            r.failure,
            Some(Failure::DiagonalAtOrigin { component: 0, .. })
        ));
        let r = check_pseudo_variogram(
            &cubic(),
            &[line(&[0.0, 1.0]), line(&[0.0, 1.0, 2.0])],
            Tolerance::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.configs_checked, 2);
    }

    #[test]
    fn sqrt_inequality_examples() {
        let r = check_sqrt_inequality(&shift01(), &[vec![2.0], vec![-3.0], vec![0.0]]).unwrap();
        assert!(r.passed());
        // (√2 - 1)² ≤ 1 leaves margin 1 - 0.17157…
        let single = check_sqrt_inequality(&shift01(), &[vec![3.0]]).unwrap();
        assert!(single.worst_margin <= 1.0);
        let neg = PseudoVariogramModel::tabulated(1, vec![vec![EntryFormula::power(-1.0, 1.0)]]).unwrap();
        let r = check_sqrt_inequality(&neg, &[vec![1.0]]).unwrap();
        assert!(matches!(r.outcome, SqrtOutcome::NegativeEntry { .. }));
    }

    #[test]
    fn intersection_examples() {
        let cfgs = vec![line(&[0.0, 1.0, 2.5]), line(&[-1.0, 0.5])];
        let all_linear =
            PseudoVariogramModel::shift(UnivariateVariogram::linear(), vec![vec![0.0], vec![0.0]]).unwrap();
        let v = check_intersection_triviality(&all_linear, &cfgs, Tolerance::default()).unwrap();
        assert!(matches!(v, IntersectionVerdict::Trivial { .. }), "{v:?}");
        let v = check_intersection_triviality(&shift01(), &cfgs, Tolerance::default()).unwrap();
        match v {
            IntersectionVerdict::NotInIntersection { failures } => {
                assert!(failures
                    .iter()
                    .any(|f| matches!(f, MembershipFailure::CrossNonzeroAtOrigin { .. })));
                assert!(failures.iter().all(|f| f.membership() == "cross-variogram"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn brute_force_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = brute_force_qf_search(
            &cubic(),
            &line(&[0.0, 1.0, 2.0]),
            Constraint::GlobalSum,
            10_000,
            &mut rng,
        )
        .unwrap();
        assert!(r.max >= 8.0 / 6.0 - 1e-3 && r.max <= 8.0 / 6.0 + 1e-12);
        let z = PseudoVariogramModel::<f64>::zero(1, 1);
        let r = brute_force_qf_search(&z, &line(&[0.0, 1.0]), Constraint::GlobalSum, 10, &mut rng).unwrap();
        assert_eq!(r.max, 0.0);
        let r = brute_force_qf_search(
            &shift01(),
            &line(&[0.0, 0.7, 1.3]),
            Constraint::GlobalSum,
            10_000,
            &mut rng,
        )
        .unwrap();
        assert!(r.max <= 1e-8);
        assert!(brute_force_qf_search(&z, &line(&[0.0]), Constraint::GlobalSum, 0, &mut rng).is_err());
    }
}
