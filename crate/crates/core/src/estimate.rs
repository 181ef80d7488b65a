//! Empirical estimators on replicated gridded samples, and model comparison.
//!
//! Lags are offsets in grid indices. For a lag `(ds, dt)` the pair set holds
//! every `((s + ds, t + dt), (s, t))` with both ends on the grid. Fields are
//! assumed centred, so no mean is removed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::MatrixFunction;
use crate::gneiting::GneitingModel;
use crate::points::PointConfig;
use crate::scalar::Scalar;
use crate::simulate::FieldSample;

/// Offset in grid indices along the space and time axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridLag {
    pub space: isize,
    pub time: isize,
}

impl GridLag {
    pub fn new(space: isize, time: isize) -> Self {
        Self { space, time }
    }

    pub fn reversed(self) -> Self {
        Self {
            space: -self.space,
            time: -self.time,
        }
    }
}

/// Component pair and lag of one estimate; components are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntryKey {
    pub i: usize,
    pub j: usize,
    pub lag: GridLag,
}

fn shifted_range(n: usize, lag: isize) -> std::ops::Range<usize> {
    let n = n as isize;
    let lo = (-lag).max(0);
    let hi = (n - lag).min(n);
    if lo >= hi {
        0..0
    } else {
        lo as usize..hi as usize
    }
}

/// Base indices `(s, t)` whose lagged partner `(s + ds, t + dt)` is on the grid.
pub fn pair_set(n_space: usize, n_time: usize, lag: GridLag) -> Vec<(usize, usize)> {
    let ts = shifted_range(n_time, lag.time);
    shifted_range(n_space, lag.space)
        .flat_map(|s| ts.clone().map(move |t| (s, t)))
        .collect()
}

fn offset(i: usize, lag: isize) -> usize {
    (i as isize + lag) as usize
}

fn checked_pairs<T: Scalar>(samples: &FieldSample<T>, i: usize, j: usize, lag: GridLag) -> Result<Vec<(usize, usize)>> {
    let m = samples.variates();
    for c in [i, j] {
        if c >= m {
            return Err(Error::IndexOutOfRange { index: c, len: m });
        }
    }
    if samples.replicates() < 2 {
        return Err(Error::TooFewReplicates {
            needed: 2,
            got: samples.replicates(),
        });
    }
    let pairs = pair_set(samples.n_space(), samples.n_time(), lag);
    if pairs.is_empty() {
        return Err(Error::EmptyPairSet);
    }
    Ok(pairs)
}

fn mean_over<T: Scalar>(
    samples: &FieldSample<T>,
    pairs: &[(usize, usize)],
    f: impl Fn(&[T], (usize, usize)) -> T,
) -> T {
    let mut acc = T::zero();
    for r in 0..samples.replicates() {
        let z = samples.replicate(r);
        for &p in pairs {
            acc += f(z, p);
        }
    }
    acc / T::lit((samples.replicates() * pairs.len()) as f64)
}

/// `(1/(2N|P|)) Σ_r Σ_P (Z_i(x + h) - Z_j(x))²`.
pub fn empirical_pseudo_variogram<T: Scalar>(samples: &FieldSample<T>, i: usize, j: usize, lag: GridLag) -> Result<T> {
    let pairs = checked_pairs(samples, i, j, lag)?;
    let mean = mean_over(samples, &pairs, |z, (s, t)| {
        let a = z[samples.node_index(i, offset(s, lag.space), offset(t, lag.time))];
        let b = z[samples.node_index(j, s, t)];
        (a - b) * (a - b)
    });
    Ok(mean * T::lit(0.5))
}

/// Mean of `Z_i(x + h, t + u)·Z_j(x, t)` over replicates and pairs.
pub fn empirical_cross_covariance<T: Scalar>(samples: &FieldSample<T>, i: usize, j: usize, lag: GridLag) -> Result<T> {
    let pairs = checked_pairs(samples, i, j, lag)?;
    Ok(mean_over(samples, &pairs, |z, (s, t)| {
        z[samples.node_index(i, offset(s, lag.space), offset(t, lag.time))] * z[samples.node_index(j, s, t)]
    }))
}

/// Every `(i, j, lag)` with a nonempty pair set, in lexicographic order.
pub fn all_keys(variates: usize, n_space: usize, n_time: usize) -> Vec<EntryKey> {
    let (ns, nt) = (n_space as isize, n_time as isize);
    let mut keys = Vec::new();
    for i in 0..variates {
        for j in 0..variates {
            for space in (1 - ns)..ns {
                for time in (1 - nt)..nt {
                    keys.push(EntryKey {
                        i,
                        j,
                        lag: GridLag { space, time },
                    });
                }
            }
        }
    }
    keys
}

fn lag_vector<T: Scalar>(config: &PointConfig<T>, from: usize, to: usize) -> Vec<T> {
    config
        .point(to)
        .iter()
        .zip(config.point(from))
        .map(|(&a, &b)| a - b)
        .collect()
}

/// `γ_ij` averaged over the pair set of a spatial lag on `config`.
pub fn model_pseudo_variogram<T: Scalar, F: MatrixFunction<T> + ?Sized>(
    gamma: &F,
    config: &PointConfig<T>,
    key: EntryKey,
) -> Result<T> {
    let pairs = pair_set(config.len(), 1, key.lag);
    if pairs.is_empty() {
        return Err(Error::EmptyPairSet);
    }
    let mut acc = T::zero();
    for &(s, _) in &pairs {
        acc += gamma.eval(key.i, key.j, &lag_vector(config, s, offset(s, key.lag.space)))?;
    }
    Ok(acc / T::lit(pairs.len() as f64))
}

/// Space-time covariance `G_ij` averaged over the pair set of a lag.
pub fn model_cross_covariance<T: Scalar>(
    model: &GneitingModel<T>,
    space: &PointConfig<T>,
    time: &PointConfig<T>,
    key: EntryKey,
) -> Result<T> {
    let pairs = pair_set(space.len(), time.len(), key.lag);
    if pairs.is_empty() {
        return Err(Error::EmptyPairSet);
    }
    let mut acc = T::zero();
    for &(s, t) in &pairs {
        let h = lag_vector(space, s, offset(s, key.lag.space));
        let u = lag_vector(time, t, offset(t, key.lag.time));
        acc += model.eval(key.i, key.j, &h, &u)?;
    }
    Ok(acc / T::lit(pairs.len() as f64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow<T> {
    pub key: EntryKey,
    pub empirical: T,
    pub model: T,
    pub diff: T,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport<T> {
    pub rows: Vec<ReportRow<T>>,
    /// Row with the largest difference.
    pub worst: Option<usize>,
}

impl<T: Scalar> ComparisonReport<T> {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn worst_row(&self) -> Option<&ReportRow<T>> {
        self.worst.map(|k| &self.rows[k])
    }
}

/// Entrywise verdict `|e - m| <= max(abs_tol, rel_tol·|m|)`.
pub fn compare_report<T: Scalar>(
    empirical: &[(EntryKey, T)],
    model: &[(EntryKey, T)],
    abs_tol: T,
    rel_tol: T,
) -> Result<ComparisonReport<T>> {
    if empirical.len() != model.len() {
        return Err(Error::Misaligned(format!(
            "{} empirical entries, {} model entries",
            empirical.len(),
            model.len()
        )));
    }
    let mut rows = Vec::with_capacity(empirical.len());
    let mut worst: Option<usize> = None;
    for (k, ((ke, e), (km, mv))) in empirical.iter().zip(model).enumerate() {
        if ke != km {
            return Err(Error::Misaligned(format!("entry {k}: {ke:?} vs {km:?}")));
        }
        let diff = (*e - *mv).abs();
        let bound = abs_tol.max(rel_tol * mv.abs());
        rows.push(ReportRow {
            key: *ke,
            empirical: *e,
            model: *mv,
            diff,
            pass: diff <= bound,
        });
        if worst.is_none_or(|w| diff > rows[w].diff) {
            worst = Some(k);
        }
    }
    Ok(ComparisonReport { rows, worst })
}
