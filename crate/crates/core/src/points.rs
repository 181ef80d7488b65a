//! Finite sets of evaluation sites.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sites `x_1, …, x_n` in `R^dim`, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PointConfig<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> PointConfig<T> {
    pub fn new(points: Vec<Vec<T>>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidParameter("point config must be nonempty".into()))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("points must have dimension >= 1".into()));
        }
        let mut coords = Vec::with_capacity(dim * points.len());
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("points must be finite".into()));
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { dim, coords })
    }

    /// One-dimensional sites.
    pub fn on_line(xs: &[T]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| vec![x]).collect())
    }

    /// Sites `0, 1, …, n-1` along the first axis of `R^dim`.
    pub fn lattice(n: usize, dim: usize) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|k| {
                    let mut p = vec![T::zero(); dim];
                    p[0] = T::lit(k as f64);
                    p
                })
                .collect(),
        )
    }

    /// Uniform sites in `[-extent, extent]^dim`.
    pub fn random<R: Rng + ?Sized>(n: usize, dim: usize, extent: f64, rng: &mut R) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|_| (0..dim).map(|_| T::lit(rng.random_range(-extent..=extent))).collect())
                .collect(),
        )
    }

    /// Cartesian product `{(s, t)}` with the spatial coordinates first;
    /// ordering is space-major, time-minor.
    pub fn product(space: &PointConfig<T>, time: &PointConfig<T>) -> Self {
        let dim = space.dim + time.dim;
        let mut coords = Vec::with_capacity(dim * space.len() * time.len());
        for s in space.iter() {
            for t in time.iter() {
                coords.extend_from_slice(s);
                coords.extend_from_slice(t);
            }
        }
        Self { dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_vecs(&self) -> Vec<Vec<T>> {
        self.iter().map(<[T]>::to_vec).collect()
    }

    /// `x_i - x_j` written into `out`.
    pub fn lag_into(&self, i: usize, j: usize, out: &mut [T]) {
        for ((o, &a), &b) in out.iter_mut().zip(self.point(i)).zip(self.point(j)) {
            *o = a - b;
        }
    }

    /// All pairwise differences `x_i - x_j`, including zero.
    pub fn pairwise_lags(&self) -> Vec<Vec<T>> {
        let n = self.len();
        let mut lags = Vec::with_capacity(n * n);
        let mut buf = vec![T::zero(); self.dim];
        for i in 0..n {
            for j in 0..n {
                self.lag_into(i, j, &mut buf);
                lags.push(buf.clone());
            }
        }
        lags
    }
}
