//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage
//! or configuration errors.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::definiteness::{
    brute_force_qf_search, check_almost_nd, check_cnd, check_intersection_triviality, check_pd_all,
    check_pseudo_variogram, check_sqrt_inequality, pd_check_matrix, probe_configs, Constraint, DefinitenessReport,
    IntersectionVerdict, SqrtOutcome, Tolerance, Verdict,
};
use crate::error::{Error, Result};
use crate::estimate::{
    all_keys, compare_report, empirical_cross_covariance, empirical_pseudo_variogram, model_cross_covariance,
    model_pseudo_variogram, ComparisonReport,
};
use crate::function::{MatrixFunction, Stationary};
use crate::gneiting::{assemble_spacetime_cov, GneitingModel};
use crate::points::PointConfig;
use crate::simulate::{run_simulation, sample_gaussian_ensemble, FieldSample};
use crate::transforms::{bernstein_compose, general_laplace_map, laplace_map, schoenberg_map};
use config::{Resolved, SimulationFile, TransformPlan};
use output::{fmt_num, report_lines, verdict_str, witness_row};

/// Exit code when every check passes.
pub const EXIT_PASS: i32 = 0;
/// Exit code when a mathematical check fails.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;

/// Largest number of sites in a random probe configuration.
const MAX_SITES: usize = 8;
/// Lags tested by the square-root inequality.
const SQRT_LAGS: usize = 1000;
/// Largest space-time covariance matrix assembled by `gneiting-check`.
const MAX_ORDER: usize = 60;

#[derive(Debug, Parser)]
#[command(
    name = "pseudovario",
    version,
    about = "Pseudo-variogram validation, transforms, simulation and estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Model file (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Random probe configurations, in addition to three lattices.
    #[arg(long, default_value_t = 20)]
    configs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative eigenvalue tolerance, scaled by max(1, max |entry|).
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Witness CSV written on failure.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that a model is a pseudo-variogram.
    Validate(CheckArgs),
    /// Apply a transform and check the image.
    Transform {
        #[command(flatten)]
        check: CheckArgs,
        /// Transform file (JSON).
        #[arg(long)]
        plan: PathBuf,
    },
    /// Check that a space-time model yields positive semi-definite matrices.
    GneitingCheck(CheckArgs),
    /// Run a simulation plan.
    Simulate {
        #[arg(long)]
        plan: PathBuf,
        /// Overrides the seed of the plan.
        #[arg(long)]
        seed: Option<u64>,
        /// Samples CSV.
        #[arg(long)]
        out: PathBuf,
        /// Comparison CSV of empirical against model second moments.
        #[arg(long)]
        empirical: Option<PathBuf>,
        /// Absolute comparison tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Compare a samples CSV with the model of a plan.
    Estimate {
        #[arg(long)]
        plan: PathBuf,
        /// Samples CSV, as written by `simulate --out`.
        #[arg(long)]
        empirical: PathBuf,
        /// Comparison CSV.
        #[arg(long)]
        out: PathBuf,
        /// Absolute comparison tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Random search for violations, compared against the eigenvalue verdict.
    Oracle {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        configs: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

/// Parses `argv` (program name first), executes, and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// As [`run`], writing to the given streams.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<bool> {
    match cmd {
        Command::Validate(a) => validate(&a, out),
        Command::Transform { check, plan } => transform(&check, &plan, out),
        Command::GneitingCheck(a) => gneiting_check(&a, out),
        Command::Simulate {
            plan,
            seed,
            out: path,
            empirical,
            tol,
        } => simulate(&plan, seed, &path, empirical.as_deref(), tol, out),
        Command::Estimate {
            plan,
            empirical,
            out: path,
            tol,
        } => estimate(&plan, &empirical, &path, tol, out),
        Command::Oracle {
            model,
            trials,
            seed,
            configs,
            tol,
        } => oracle(&model, trials, seed, configs, tol, out),
    }
}

fn relative_tol(tol: f64) -> Result<Tolerance<f64>> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(Tolerance::Relative(tol))
    } else {
        Err(Error::Config(format!("--tol must be a finite value >= 0, got {tol}")))
    }
}

fn emit(out: &mut dyn Write, lines: &[String]) -> Result<()> {
    for l in lines {
        writeln!(out, "{l}")?;
    }
    Ok(())
}

fn emit_failure(a: &CheckArgs, r: &DefinitenessReport<f64>) -> Result<()> {
    if let Some(path) = &a.out {
        output::write_witness_csv(path, r.witness.as_ref(), r.failure.as_ref())?;
    }
    Ok(())
}

fn random_lags(dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.random_range(-3.0..=3.0)).collect())
        .collect()
}

fn validate(a: &CheckArgs, out: &mut dyn Write) -> Result<bool> {
    let gamma = config::load_model(&a.model)?;
    let tol = relative_tol(a.tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let configs = probe_configs(gamma.dim(), a.configs, MAX_SITES, &mut rng)?;
    let report = check_pseudo_variogram(&gamma, &configs, tol)?;
    emit(out, &report_lines("pseudo-variogram (global-sum constraint)", &report))?;
    if !report.passed() {
        emit_failure(a, &report)?;
        return Ok(false);
    }

    let lags = random_lags(gamma.dim(), SQRT_LAGS, &mut rng);
    let sqrt = check_sqrt_inequality(&gamma, &lags)?;
    let line = match &sqrt.outcome {
        SqrtOutcome::Holds => format!(
            "square-root inequality: holds (worst margin {})",
            fmt_num(sqrt.worst_margin)
        ),
        SqrtOutcome::Violated { i, j, lag } => {
            format!(
                "square-root inequality: violated for ({}, {}) at lag {lag:?}",
                i + 1,
                j + 1
            )
        }
        SqrtOutcome::NegativeEntry { i, j, lag, value } => format!(
            "square-root inequality: entry ({}, {}) is negative ({}) at lag {lag:?}",
            i + 1,
            j + 1,
            fmt_num(*value)
        ),
    };
    writeln!(out, "{line}")?;

    match check_intersection_triviality(&gamma, &configs, tol)? {
        IntersectionVerdict::Trivial { max_deviation } => writeln!(
            out,
            "intersection: pseudo- and cross-variogram, all entries equal (max deviation {})",
            fmt_num(max_deviation)
        )?,
        IntersectionVerdict::Nontrivial { max_deviation } => writeln!(
            out,
            "intersection: pseudo- and cross-variogram with unequal entries (max deviation {})",
            fmt_num(max_deviation)
        )?,
        IntersectionVerdict::NotInIntersection { failures } => {
            for f in failures {
                writeln!(out, "intersection: outside ({f})")?;
            }
        }
    }
    Ok(sqrt.passed())
}

fn transform(a: &CheckArgs, plan: &std::path::Path, out: &mut dyn Write) -> Result<bool> {
    let gamma = config::load_model(&a.model)?;
    let plan: TransformPlan = config::read_json(plan)?;
    let tol = relative_tol(a.tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let configs = probe_configs(gamma.dim(), a.configs, MAX_SITES, &mut rng)?;
    let report = match plan {
        TransformPlan::Schoenberg { t } => check_pd_all(&Stationary(schoenberg_map(&gamma, t)?), &configs, tol)?,
        TransformPlan::Laplace { t, lambda } => {
            check_pd_all(&Stationary(laplace_map(&gamma, t, lambda)?), &configs, tol)?
        }
        TransformPlan::GeneralLaplace { t, measure, draws } => {
            let map = general_laplace_map(&gamma, t, &measure, draws, &mut rng)?;
            check_pd_all(&Stationary(map), &configs, tol)?
        }
        TransformPlan::Bernstein { g } => {
            let image = bernstein_compose(g, gamma)?;
            let r = check_pseudo_variogram(&image, &configs, tol)?;
            emit(out, &report_lines("image is a pseudo-variogram", &r))?;
            if !r.passed() {
                emit_failure(a, &r)?;
            }
            return Ok(r.passed());
        }
    };
    let report = report.ok_or_else(|| Error::Config("no probe configurations".into()))?;
    emit(out, &report_lines("image is positive semi-definite", &report))?;
    if !report.passed() {
        emit_failure(a, &report)?;
    }
    Ok(report.passed())
}

fn random_grid(model: &GneitingModel<f64>, rng: &mut ChaCha8Rng) -> Result<(PointConfig<f64>, PointConfig<f64>)> {
    let m = model.variates();
    let max_space = (MAX_ORDER / m).clamp(1, 8);
    let ns = rng.random_range(1..=max_space);
    let nt = rng.random_range(1..=(MAX_ORDER / (m * ns)).clamp(1, 8));
    Ok((
        PointConfig::random(ns, model.spatial_dim(), 3.0, rng)?,
        PointConfig::random(nt, model.temporal_dim(), 3.0, rng)?,
    ))
}

fn gneiting_check(a: &CheckArgs, out: &mut dyn Write) -> Result<bool> {
    let model = config::load_gneiting(&a.model)?;
    let tol = relative_tol(a.tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut grids = vec![(
        PointConfig::lattice(3, model.spatial_dim())?,
        PointConfig::lattice(2, model.temporal_dim())?,
    )];
    for _ in 0..a.configs {
        grids.push(random_grid(&model, &mut rng)?);
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (k, (space, time)) in grids.iter().enumerate() {
        let cov = assemble_spacetime_cov(&model, space, time)?;
        let r = pd_check_matrix(&cov, &PointConfig::product(space, time), tol);
        lo = lo.min(r.eigenvalue_range.0);
        hi = hi.max(r.eigenvalue_range.1);
        if !r.passed() {
            let mut lines = report_lines(&format!("space-time covariance, grid {k}"), &r);
            lines.push(format!(
                "  grid: {} spatial x {} temporal sites",
                space.len(),
                time.len()
            ));
            emit(out, &lines)?;
            emit_failure(a, &r)?;
            return Ok(false);
        }
    }
    emit(
        out,
        &[
            format!("space-time covariance: {}", verdict_str(Verdict::Pass)),
            format!("  grids checked: {}", grids.len()),
            format!("  min eigenvalue: {}", fmt_num(lo)),
            format!("  max eigenvalue: {}", fmt_num(hi)),
        ],
    )?;
    Ok(true)
}

/// Default absolute tolerance of the comparison table.
fn default_abs_tol(resolved: &Resolved, replicates: usize) -> f64 {
    let se = 1.0 / (replicates as f64).sqrt();
    match resolved {
        Resolved::Spectral { .. } => (4.0 * se).max(0.02),
        Resolved::Exact { .. } => 6.0 * se,
    }
}

/// Empirical second moments of every `(i, j, lag)` against the model.
fn comparison(resolved: &Resolved, samples: &FieldSample<f64>, abs_tol: Option<f64>) -> Result<ComparisonReport<f64>> {
    let keys = all_keys(samples.variates(), samples.n_space(), samples.n_time());
    let abs = abs_tol.unwrap_or_else(|| default_abs_tol(resolved, samples.replicates()));
    if !(abs >= 0.0) {
        return Err(Error::Config(format!("--tol must be >= 0, got {abs}")));
    }
    let mut emp = Vec::with_capacity(keys.len());
    let mut model = Vec::with_capacity(keys.len());
    match resolved {
        Resolved::Spectral { plan, gamma, phi } => {
            let g = GneitingModel::multivariate_extended(phi.clone(), gamma.clone(), plan.spatial.dim())?;
            for &k in &keys {
                emp.push((k, empirical_cross_covariance(samples, k.i, k.j, k.lag)?));
                model.push((k, model_cross_covariance(&g, &plan.spatial, &plan.temporal, k)?));
            }
            compare_report(&emp, &model, abs, 0.0)
        }
        Resolved::Exact { config, gamma, .. } => {
            for &k in &keys {
                emp.push((k, empirical_pseudo_variogram(samples, k.i, k.j, k.lag)?));
                model.push((k, model_pseudo_variogram(gamma, config, k)?));
            }
            compare_report(&emp, &model, abs, 6.0 / (samples.replicates() as f64).sqrt())
        }
    }
}

fn summary(report: &ComparisonReport<f64>) -> Vec<String> {
    let failed = report.rows.iter().filter(|r| !r.pass).count();
    let mut lines = vec![format!(
        "comparison: {} ({} of {} entries within tolerance)",
        if report.passed() { "pass" } else { "fail" },
        report.rows.len() - failed,
        report.rows.len()
    )];
    if let Some(w) = report.worst_row() {
        lines.push(format!(
            "  worst: i={} j={} space_lag={} time_lag={} empirical={} model={} diff={}",
            w.key.i + 1,
            w.key.j + 1,
            w.key.lag.space,
            w.key.lag.time,
            fmt_num(w.empirical),
            fmt_num(w.model),
            fmt_num(w.diff)
        ));
    }
    lines
}

fn simulate(
    plan: &std::path::Path,
    seed: Option<u64>,
    path: &std::path::Path,
    empirical: Option<&std::path::Path>,
    tol: Option<f64>,
    out: &mut dyn Write,
) -> Result<bool> {
    let file: SimulationFile = config::read_json(plan)?;
    let resolved = file.resolve(seed)?;
    let samples = match &resolved {
        Resolved::Spectral { plan, gamma, phi } => {
            let run = run_simulation(plan, gamma, phi)?;
            output::write_samples_file(path, run.normalized.as_ref().unwrap_or(&run.samples))?;
            run.samples
        }
        Resolved::Exact {
            config,
            gamma,
            replicates,
            seed,
        } => {
            let s = sample_gaussian_ensemble(gamma, config, *replicates, *seed)?;
            output::write_samples_file(path, &s)?;
            s
        }
    };
    writeln!(
        out,
        "simulated {} replicates on {} nodes, written to {}",
        samples.replicates(),
        samples.nodes(),
        path.display()
    )?;
    let Some(emp_path) = empirical else {
        return Ok(true);
    };
    let report = comparison(&resolved, &samples, tol)?;
    output::write_report_file(emp_path, &report)?;
    emit(out, &summary(&report))?;
    Ok(report.passed())
}

fn estimate(
    plan: &std::path::Path,
    samples_path: &std::path::Path,
    path: &std::path::Path,
    tol: Option<f64>,
    out: &mut dyn Write,
) -> Result<bool> {
    let file: SimulationFile = config::read_json(plan)?;
    // the seed plays no part in estimation
    let resolved = file.resolve(Some(0))?;
    let (m, ns, nt) = match &resolved {
        Resolved::Spectral { plan, .. } => (plan.variates, plan.spatial.len(), plan.temporal.len()),
        Resolved::Exact { config, gamma, .. } => (gamma.variates(), config.len(), 1),
    };
    let samples = output::read_samples(samples_path, m, ns, nt)?;
    let report = comparison(&resolved, &samples, tol)?;
    output::write_report_file(path, &report)?;
    emit(out, &summary(&report))?;
    Ok(report.passed())
}

fn oracle(
    model: &std::path::Path,
    trials: usize,
    seed: u64,
    configs: usize,
    tol: f64,
    out: &mut dyn Write,
) -> Result<bool> {
    let gamma = config::load_model(model)?;
    let tol = relative_tol(tol)?;
    let m = gamma.variates();
    let max_sites = 6 / m;
    if max_sites < 2 {
        return Err(Error::Config(format!(
            "the oracle needs n·m <= 6 with n >= 2 sites; model has m = {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let configs: Vec<_> = probe_configs(gamma.dim(), configs, max_sites, &mut rng)?
        .into_iter()
        .filter(|c| c.len() * m <= 6)
        .collect();
    let mut agree = true;
    let mut violation = false;
    for (k, c) in configs.iter().enumerate() {
        for constraint in [Constraint::GlobalSum, Constraint::PerComponentSum] {
            let eigen = match constraint {
                Constraint::GlobalSum => check_cnd(&gamma, c, tol)?,
                _ => check_almost_nd(&gamma, c, tol)?,
            };
            let search = brute_force_qf_search(&gamma, c, constraint, trials, &mut rng)?;
            let brute_pass = search.max <= eigen.tolerance;
            let same = eigen.passed() == brute_pass;
            agree &= same;
            if constraint == Constraint::GlobalSum && !brute_pass {
                violation = true;
            }
            writeln!(
                out,
                "config {k} ({} sites) {constraint}: eigen={} max_eigenvalue={} search={} max_qf={}{}",
                c.len(),
                verdict_str(eigen.verdict),
                fmt_num(eigen.extremal_eigenvalue),
                if brute_pass { "pass" } else { "fail" },
                fmt_num(search.max),
                if same { "" } else { " DISAGREE" }
            )?;
            if !brute_pass && constraint == Constraint::GlobalSum {
                if let Some(w) = &eigen.witness {
                    writeln!(out, "  witness: {}", witness_row(w))?;
                }
            }
        }
    }
    writeln!(out, "verdicts {}", if agree { "agree" } else { "disagree" })?;
    Ok(agree && !violation)
}
