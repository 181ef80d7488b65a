//! Random field simulation.
//!
//! [`GaussianPseudoSampler`] draws a centred Gaussian field with a prescribed
//! pseudo-variogram `γ` from the covariance
//! `Cov(Z_p(x), Z_q(y)) = γ_p1(x) + γ_q1(y) - γ_pq(x - y)` (the field pinned
//! so that `Z_1(0) = 0`). The spectral simulator evaluates
//!
//! ```text
//! Z_i(x, t) = √(-2 log U) · cos(√(2R)⟨Ω, x⟩ + ‖Ω‖/√2 · W_i(t) + Φ)
//! ```
//!
//! whose covariance is the multivariate extended Gneiting model with `r = d/2`.
//!
//! Every replicate owns a random stream seeded from `(master seed, index)`,
//! so results do not depend on how replicates are scheduled.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::definiteness::assemble_kernel_block;
use crate::error::{Error, Result};
use crate::function::MatrixFunction;
use crate::models::CompletelyMonotoneSpec;
use crate::points::PointConfig;
use crate::scalar::{norm, Scalar};
use crate::transforms::build_ck_kernel;

/// Jitter added to the diagonal before Cholesky, tried in order.
pub const JITTER_LADDER: [f64; 7] = [1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Replicates per block in reductions; fixes the summation order.
const REDUCTION_BLOCK: usize = 4096;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream of replicate `index` under `master_seed`.
pub fn replicate_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ splitmix64(index)))
}

/// Exact sampler for a Gaussian field with pseudo-variogram `γ` on a fixed
/// configuration. Output vectors are site-major: entry `i·m + p` is
/// `Z_p(x_i)`.
#[derive(Clone, Debug)]
pub struct GaussianPseudoSampler<T: Scalar> {
    /// Lower Cholesky factor of the non-degenerate block.
    factor: DMatrix<T>,
    /// Positions of the non-degenerate coordinates in the output.
    active: Vec<usize>,
    len: usize,
    variates: usize,
    jitter: T,
}

impl<T: Scalar> GaussianPseudoSampler<T> {
    pub fn new<F: MatrixFunction<T>>(gamma: &F, config: &PointConfig<T>) -> Result<Self> {
        let kernel = build_ck_kernel(gamma, 0, false)?;
        let cov = assemble_kernel_block(&kernel, config)?;
        let len = cov.nrows();
        // a zero variance with a zero row is a deterministic zero coordinate
        let active: Vec<usize> = (0..len)
            .filter(|&r| cov[(r, r)] != T::zero() || cov.row(r).iter().any(|&x| x != T::zero()))
            .collect();
        let sub = DMatrix::from_fn(active.len(), active.len(), |a, b| cov[(active[a], active[b])]);
        for &jit in &JITTER_LADDER {
            let jitter = T::lit(jit);
            let mut m = sub.clone();
            for k in 0..m.nrows() {
                m[(k, k)] += jitter;
            }
            if let Some(ch) = Cholesky::new(m) {
                return Ok(Self {
                    factor: ch.l(),
                    active,
                    len,
                    variates: gamma.variates(),
                    jitter,
                });
            }
        }
        Err(Error::CholeskyFailure {
            jitter: JITTER_LADDER[JITTER_LADDER.len() - 1],
        })
    }

    /// Output length `n·m`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn variates(&self) -> usize {
        self.variates
    }

    /// Diagonal jitter that made the factorization succeed.
    pub fn jitter(&self) -> T {
        self.jitter
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [T]) {
        let k = self.active.len();
        let z = DVector::from_fn(k, |_, _| T::lit(rng.sample::<f64, _>(StandardNormal)));
        let x = &self.factor * z;
        out.iter_mut().for_each(|v| *v = T::zero());
        for (a, &pos) in self.active.iter().enumerate() {
            out[pos] = x[a];
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let mut out = vec![T::zero(); self.len];
        self.sample_into(rng, &mut out);
        out
    }
}

/// One draw of a centred Gaussian field with pseudo-variogram `γ` on
/// `config`, site-major.
pub fn sample_gaussian_pseudo<T: Scalar, F: MatrixFunction<T>, R: Rng + ?Sized>(
    gamma: &F,
    config: &PointConfig<T>,
    rng: &mut R,
) -> Result<Vec<T>> {
    Ok(GaussianPseudoSampler::new(gamma, config)?.sample(rng))
}

/// Replicated field values, row-major over
/// `(replicate, component, space index, time index)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample<T> {
    replicates: usize,
    variates: usize,
    n_space: usize,
    n_time: usize,
    data: Vec<T>,
}

impl<T: Scalar> FieldSample<T> {
    pub fn zeros(replicates: usize, variates: usize, n_space: usize, n_time: usize) -> Self {
        Self {
            replicates,
            variates,
            n_space,
            n_time,
            data: vec![T::zero(); replicates * variates * n_space * n_time],
        }
    }

    pub fn from_vec(replicates: usize, variates: usize, n_space: usize, n_time: usize, data: Vec<T>) -> Result<Self> {
        let expected = replicates * variates * n_space * n_time;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            replicates,
            variates,
            n_space,
            n_time,
            data,
        })
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn variates(&self) -> usize {
        self.variates
    }

    pub fn n_space(&self) -> usize {
        self.n_space
    }

    pub fn n_time(&self) -> usize {
        self.n_time
    }

    /// Values per replicate.
    pub fn nodes(&self) -> usize {
        self.variates * self.n_space * self.n_time
    }

    pub fn node_index(&self, component: usize, space: usize, time: usize) -> usize {
        (component * self.n_space + space) * self.n_time + time
    }

    pub fn get(&self, replicate: usize, component: usize, space: usize, time: usize) -> T {
        self.data[replicate * self.nodes() + self.node_index(component, space, time)]
    }

    pub fn replicate(&self, r: usize) -> &[T] {
        let n = self.nodes();
        &self.data[r * n..(r + 1) * n]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SimulationPlan<T: Scalar> {
    pub spatial: PointConfig<T>,
    pub temporal: PointConfig<T>,
    pub variates: usize,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub normalize: bool,
}

impl<T: Scalar> SimulationPlan<T> {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::InvalidParameter("replicate count must be >= 1".into()));
        }
        if self.variates < 1 {
            return Err(Error::InvalidParameter("variate count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Random inputs of one spectral replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDraw<T> {
    /// `R ~ μ`.
    pub radius: T,
    /// `Ω ~ N(0, I_d)`.
    pub omega: Vec<T>,
    /// `U ~ U(0, 1)`.
    pub u: T,
    /// `Φ ~ U(0, 2π)`.
    pub phase: T,
    /// `W` on the temporal grid, site-major.
    pub w: Vec<T>,
}

/// Spectral simulator with the temporal Gaussian sampler factored once.
#[derive(Clone, Debug)]
pub struct SpectralSimulator<'a, T: Scalar> {
    plan: &'a SimulationPlan<T>,
    phi: CompletelyMonotoneSpec<T>,
    w_sampler: GaussianPseudoSampler<T>,
}

impl<'a, T: Scalar> SpectralSimulator<'a, T> {
    pub fn new<F: MatrixFunction<T>>(
        plan: &'a SimulationPlan<T>,
        gamma: &F,
        phi: &CompletelyMonotoneSpec<T>,
    ) -> Result<Self> {
        plan.validate()?;
        phi.validate()?;
        if gamma.variates() != plan.variates {
            return Err(Error::DimensionMismatch {
                expected: plan.variates,
                got: gamma.variates(),
            });
        }
        if gamma.dim() != plan.temporal.dim() {
            return Err(Error::DimensionMismatch {
                expected: gamma.dim(),
                got: plan.temporal.dim(),
            });
        }
        let w_sampler = GaussianPseudoSampler::new(gamma, &plan.temporal)?;
        Ok(Self {
            plan,
            phi: phi.clone(),
            w_sampler,
        })
    }

    /// Draw order: `R`, `Ω`, `U`, `Φ`, then `W`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> SpectralDraw<T> {
        let radius = self.phi.sample_laplace_measure(rng);
        let omega = (0..self.plan.spatial.dim())
            .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
            .collect();
        // (0, 1]: log stays finite
        let u = T::lit(1.0 - rng.random::<f64>());
        let phase = T::lit(rng.random::<f64>()) * T::two_pi();
        let w = self.w_sampler.sample(rng);
        SpectralDraw {
            radius,
            omega,
            u,
            phase,
            w,
        }
    }

    /// Writes `Z_i(x_s, t_k)` at `(i·n_s + s)·n_t + k`.
    pub fn evaluate(&self, draw: &SpectralDraw<T>, out: &mut [T]) {
        let m = self.plan.variates;
        let (ns, nt) = (self.plan.spatial.len(), self.plan.temporal.len());
        let amplitude = (-T::lit(2.0) * draw.u.ln()).sqrt();
        let freq = (T::lit(2.0) * draw.radius).sqrt();
        let w_scale = norm(&draw.omega) / T::lit(2.0).sqrt();
        for s in 0..ns {
            let x = self.plan.spatial.point(s);
            let dot = x.iter().zip(&draw.omega).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
            let spatial_phase = freq * dot + draw.phase;
            for k in 0..nt {
                for i in 0..m {
                    let arg = spatial_phase + w_scale * draw.w[k * m + i];
                    out[(i * ns + s) * nt + k] = amplitude * arg.cos();
                }
            }
        }
    }

    pub fn replicate_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [T]) {
        let d = self.draw(rng);
        self.evaluate(&d, out);
    }
}

/// One spectral replicate.
pub fn simulate_spectral_replicate<T: Scalar, F: MatrixFunction<T>, R: Rng + ?Sized>(
    plan: &SimulationPlan<T>,
    gamma: &F,
    phi: &CompletelyMonotoneSpec<T>,
    rng: &mut R,
) -> Result<FieldSample<T>> {
    let sim = SpectralSimulator::new(plan, gamma, phi)?;
    let mut out = FieldSample::zeros(1, plan.variates, plan.spatial.len(), plan.temporal.len());
    sim.replicate_into(rng, &mut out.data);
    Ok(out)
}

/// Raw second moments `(1/N) Σ_r Z_r[a]·Z_r[b]` over node indices `a, b`
/// (fields are centred).
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCovariance<T: Scalar> {
    pub values: DMatrix<T>,
    pub replicates: usize,
}

/// Moments computed in fixed blocks of replicates, so the floating point
/// result does not depend on the thread count.
pub fn empirical_covariance<T: Scalar>(samples: &FieldSample<T>) -> EmpiricalCovariance<T> {
    let n = samples.nodes();
    let block_sums: Vec<DMatrix<T>> = (0..samples.replicates)
        .step_by(REDUCTION_BLOCK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let end = (start + REDUCTION_BLOCK).min(samples.replicates);
            let mut acc = DMatrix::zeros(n, n);
            for r in start..end {
                let z = samples.replicate(r);
                for a in 0..n {
                    for b in a..n {
                        acc[(a, b)] += z[a] * z[b];
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = DMatrix::zeros(n, n);
    for b in &block_sums {
        total += b;
    }
    let inv = T::one() / T::lit(samples.replicates as f64);
    for a in 0..n {
        for b in a..n {
            let v = total[(a, b)] * inv;
            total[(a, b)] = v;
            total[(b, a)] = v;
        }
    }
    EmpiricalCovariance {
        values: total,
        replicates: samples.replicates,
    }
}

#[derive(Clone, Debug)]
pub struct SimulationOutput<T: Scalar> {
    pub samples: FieldSample<T>,
    /// `(1/√N) Σ_n Z^{(n)}` when the plan asks for it.
    pub normalized: Option<FieldSample<T>>,
    pub covariance: EmpiricalCovariance<T>,
}

fn in_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn normalized_sum<T: Scalar>(samples: &FieldSample<T>) -> FieldSample<T> {
    let n = samples.nodes();
    let mut acc = vec![T::zero(); n];
    for r in 0..samples.replicates {
        for (a, &z) in acc.iter_mut().zip(samples.replicate(r)) {
            *a += z;
        }
    }
    let scale = T::one() / T::lit(samples.replicates as f64).sqrt();
    acc.iter_mut().for_each(|a| *a *= scale);
    FieldSample {
        replicates: 1,
        variates: samples.variates,
        n_space: samples.n_space,
        n_time: samples.n_time,
        data: acc,
    }
}

/// All replicates of the plan, run on the global rayon pool.
pub fn run_simulation<T: Scalar, F: MatrixFunction<T>>(
    plan: &SimulationPlan<T>,
    gamma: &F,
    phi: &CompletelyMonotoneSpec<T>,
) -> Result<SimulationOutput<T>> {
    run_simulation_with_threads(plan, gamma, phi, None)
}

/// As [`run_simulation`], on a dedicated pool of `threads` workers when given.
pub fn run_simulation_with_threads<T: Scalar, F: MatrixFunction<T>>(
    plan: &SimulationPlan<T>,
    gamma: &F,
    phi: &CompletelyMonotoneSpec<T>,
    threads: Option<usize>,
) -> Result<SimulationOutput<T>> {
    let sim = SpectralSimulator::new(plan, gamma, phi)?;
    let mut samples = FieldSample::zeros(plan.replicates, plan.variates, plan.spatial.len(), plan.temporal.len());
    let nodes = samples.nodes();
    in_pool(threads, || {
        samples.data.par_chunks_mut(nodes).enumerate().for_each(|(r, out)| {
            let mut rng = replicate_rng(plan.seed, r as u64);
            sim.replicate_into(&mut rng, out);
        });
        let covariance = empirical_covariance(&samples);
        let normalized = plan.normalize.then(|| normalized_sum(&samples));
        SimulationOutput {
            samples,
            normalized,
            covariance,
        }
    })
}

/// `replicates` independent exact draws on `config`, stored with the sites
/// along the space axis and a single time index.
pub fn sample_gaussian_ensemble<T: Scalar, F: MatrixFunction<T>>(
    gamma: &F,
    config: &PointConfig<T>,
    replicates: usize,
    seed: u64,
) -> Result<FieldSample<T>> {
    if replicates < 1 {
        return Err(Error::InvalidParameter("replicate count must be >= 1".into()));
    }
    let sampler = GaussianPseudoSampler::new(gamma, config)?;
    let (n, m) = (config.len(), gamma.variates());
    let mut samples = FieldSample::zeros(replicates, m, n, 1);
    samples.data.par_chunks_mut(n * m).enumerate().for_each_init(
        || vec![T::zero(); n * m],
        |buf, (r, out)| {
            let mut rng = replicate_rng(seed, r as u64);
            sampler.sample_into(&mut rng, buf);
            // site-major draw into component-major storage
            for i in 0..n {
                for p in 0..m {
                    out[p * n + i] = buf[i * m + p];
                }
            }
        },
    );
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{EntryFormula, PseudoVariogramModel, UnivariateVariogram};

    fn shift01() -> PseudoVariogramModel<f64> {
        PseudoVariogramModel::shift(UnivariateVariogram::linear(), vec![vec![0.0], vec![1.0]]).unwrap()
    }

    fn line(xs: &[f64]) -> PointConfig<f64> {
        PointConfig::on_line(xs).unwrap()
    }

    fn plan(replicates: usize, seed: u64) -> SimulationPlan<f64> {
        SimulationPlan {
            spatial: line(&[0.0, 0.5, 1.0]),
            temporal: line(&[0.0, 1.0]),
            variates: 2,
            replicates,
            seed,
            normalize: false,
        }
    }

    #[test]
    fn zero_gamma_samples_zero() {
        let z = PseudoVariogramModel::<f64>::zero(1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = sample_gaussian_pseudo(&z, &line(&[0.0, 1.0, 3.0]), &mut rng).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn brownian_covariance_by_hand() {
        // K = 2 min(x, y) with the origin pinned
        let lin = PseudoVariogramModel::shift(UnivariateVariogram::linear(), vec![vec![0.0]]).unwrap();
        let s = sample_gaussian_ensemble(&lin, &line(&[0.0, 1.0, 2.0]), 100_000, 3).unwrap();
        let var2 = (0..s.replicates()).map(|r| s.get(r, 0, 2, 0).powi(2)).sum::<f64>() / s.replicates() as f64;
        assert!((var2 - 4.0).abs() <= 0.1, "{var2}");
        assert!((0..s.replicates()).all(|r| s.get(r, 0, 0, 0) == 0.0));
    }

    #[test]
    fn invalid_gamma_fails_cholesky() {
        let cubic = PseudoVariogramModel::tabulated(1, vec![vec![EntryFormula::power(1.0, 3.0)]]).unwrap();
        let r = GaussianPseudoSampler::new(&cubic, &line(&[0.0, 1.0, 2.0, 3.0]));
        assert!(matches!(r, Err(Error::CholeskyFailure { .. })));
    }

    #[test]
    fn unit_amplitude_when_u_fixed() {
        let p = plan(1, 0);
        let sim = SpectralSimulator::new(&p, &shift01(), &CompletelyMonotoneSpec::Exp { c: 1.0 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut draw = sim.draw(&mut rng);
        draw.u = (-0.5f64).exp();
        let mut out = vec![0.0; 12];
        sim.evaluate(&draw, &mut out);
        assert!(out.iter().all(|z| z.abs() <= 1.0 + 1e-15));
    }

    #[test]
    fn single_replicate_run_matches_replicate_zero() {
        let p = plan(1, 42);
        let phi = CompletelyMonotoneSpec::Exp { c: 1.0 };
        let run = run_simulation(&p, &shift01(), &phi).unwrap();
        let mut rng = replicate_rng(42, 0);
        let one = simulate_spectral_replicate(&p, &shift01(), &phi, &mut rng).unwrap();
        assert_eq!(run.samples, one);
        assert!(run.normalized.is_none());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let p = plan(9_000, 5);
        let phi = CompletelyMonotoneSpec::InversePower { c: 1.0, lambda: 2.0 };
        let a = run_simulation_with_threads(&p, &shift01(), &phi, Some(1)).unwrap();
        let b = run_simulation_with_threads(&p, &shift01(), &phi, Some(4)).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.covariance, b.covariance);
    }

    #[test]
    fn normalized_sum_scaling() {
        let mut p = plan(4, 2);
        p.normalize = true;
        let run = run_simulation(&p, &shift01(), &CompletelyMonotoneSpec::Exp { c: 1.0 }).unwrap();
        let norm = run.normalized.unwrap();
        let direct: f64 = (0..4).map(|r| run.samples.get(r, 1, 2, 1)).sum::<f64>() / 2.0;
        assert!((norm.get(0, 1, 2, 1) - direct).abs() < 1e-15);
    }

    #[test]
    fn plan_mismatch_rejected() {
        let mut p = plan(1, 0);
        p.variates = 3;
        assert!(SpectralSimulator::new(&p, &shift01(), &CompletelyMonotoneSpec::Exp { c: 1.0 }).is_err());
        p.variates = 2;
        p.replicates = 0;
        assert!(SpectralSimulator::new(&p, &shift01(), &CompletelyMonotoneSpec::Exp { c: 1.0 }).is_err());
    }
}
