//! Matrix-valued functions and kernels.
//!
//! A [`MatrixFunction`] is a map `h ↦ (f_ij(h))` on `R^dim` (a function of
//! a lag), a [`MatrixKernel`] is a map `(x, y) ↦ (k_ij(x, y))`. Every
//! definiteness test works on kernels; [`Stationary`] lifts a function of a
//! lag to the kernel `(x, y) ↦ f(x - y)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub trait MatrixFunction<T: Scalar>: Sync {
    /// Number of variates `m`.
    fn variates(&self) -> usize;

    /// Dimension of the lag domain.
    fn dim(&self) -> usize;

    /// Entry `(i, j)` at lag `h`, indices zero-based.
    fn eval(&self, i: usize, j: usize, h: &[T]) -> Result<T>;

    /// The full `m × m` matrix at lag `h`.
    fn eval_matrix(&self, h: &[T]) -> Result<DMatrix<T>> {
        let m = self.variates();
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] = self.eval(i, j, h)?;
            }
        }
        Ok(out)
    }
}

pub trait MatrixKernel<T: Scalar>: Sync {
    fn variates(&self) -> usize;

    fn dim(&self) -> usize;

    fn eval(&self, i: usize, j: usize, x: &[T], y: &[T]) -> Result<T>;
}

impl<T: Scalar, F: MatrixFunction<T> + ?Sized> MatrixFunction<T> for &F {
    fn variates(&self) -> usize {
        (**self).variates()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, i: usize, j: usize, h: &[T]) -> Result<T> {
        (**self).eval(i, j, h)
    }
}

impl<T: Scalar, F: MatrixFunction<T> + ?Sized + Send> MatrixFunction<T> for Box<F> {
    fn variates(&self) -> usize {
        (**self).variates()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, i: usize, j: usize, h: &[T]) -> Result<T> {
        (**self).eval(i, j, h)
    }
}

impl<T: Scalar, K: MatrixKernel<T> + ?Sized> MatrixKernel<T> for &K {
    fn variates(&self) -> usize {
        (**self).variates()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, i: usize, j: usize, x: &[T], y: &[T]) -> Result<T> {
        (**self).eval(i, j, x, y)
    }
}

/// Validates `(i, j)` against `m` and `h` against `dim`.
pub(crate) fn check_args<T>(m: usize, dim: usize, i: usize, j: usize, h: &[T]) -> Result<()> {
    if i >= m {
        return Err(Error::IndexOutOfRange { index: i, len: m });
    }
    if j >= m {
        return Err(Error::IndexOutOfRange { index: j, len: m });
    }
    if h.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: h.len(),
        });
    }
    Ok(())
}

/// The kernel `(x, y) ↦ f(x - y)`.
#[derive(Clone, Copy, Debug)]
pub struct Stationary<F>(pub F);

impl<T: Scalar, F: MatrixFunction<T>> MatrixKernel<T> for Stationary<F> {
    fn variates(&self) -> usize {
        self.0.variates()
    }

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, i: usize, j: usize, x: &[T], y: &[T]) -> Result<T> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        // lags are short; a stack buffer would need a const bound on dim
        let h: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
        self.0.eval(i, j, &h)
    }
}

/// Entrywise (Hadamard) product of two functions or two kernels.
#[derive(Clone, Copy, Debug)]
pub struct Hadamard<A, B>(pub A, pub B);

impl<A, B> Hadamard<A, B> {
    fn check_shapes(va: usize, vb: usize, da: usize, db: usize) -> Result<()> {
        if va != vb {
            return Err(Error::DimensionMismatch { expected: va, got: vb });
        }
        if da != db {
            return Err(Error::DimensionMismatch { expected: da, got: db });
        }
        Ok(())
    }
}

impl<T: Scalar, A: MatrixFunction<T>, B: MatrixFunction<T>> MatrixFunction<T> for Hadamard<A, B> {
    fn variates(&self) -> usize {
        self.0.variates()
    }

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, i: usize, j: usize, h: &[T]) -> Result<T> {
        Self::check_shapes(self.0.variates(), self.1.variates(), self.0.dim(), self.1.dim())?;
        Ok(self.0.eval(i, j, h)? * self.1.eval(i, j, h)?)
    }
}

/// Kernel counterpart of [`Hadamard`].
#[derive(Clone, Copy, Debug)]
pub struct HadamardKernel<A, B>(pub A, pub B);

impl<T: Scalar, A: MatrixKernel<T>, B: MatrixKernel<T>> MatrixKernel<T> for HadamardKernel<A, B> {
    fn variates(&self) -> usize {
        self.0.variates()
    }

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, i: usize, j: usize, x: &[T], y: &[T]) -> Result<T> {
        Hadamard::<A, B>::check_shapes(self.0.variates(), self.1.variates(), self.0.dim(), self.1.dim())?;
        Ok(self.0.eval(i, j, x, y)? * self.1.eval(i, j, x, y)?)
    }
}

/// Constant matrix-valued function.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantFunction<T: Scalar> {
    pub value: DMatrix<T>,
    pub dim: usize,
}

impl<T: Scalar> MatrixFunction<T> for ConstantFunction<T> {
    fn variates(&self) -> usize {
        self.value.nrows()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, i: usize, j: usize, h: &[T]) -> Result<T> {
        check_args(self.value.nrows(), self.dim, i, j, h)?;
        Ok(self.value[(i, j)])
    }
}
