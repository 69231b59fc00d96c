//! Row-major dense storage and the handful of vector kernels the estimators
//! share.
//!
//! Row-major layout makes a single row a contiguous slice, so row norms and
//! row extraction never stride.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A `rows × cols` real matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    /// Wraps row-major `data`, rejecting wrong lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims("DenseMatrix::new (rows*cols)", rows * cols, data.len()));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::dims("DenseMatrix::from_rows (row length)", cols, r.len()));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[T]) {
        debug_assert_eq!(values.len(), self.rows);
        for (i, &v) in values.iter().enumerate() {
            self.set(i, j, v);
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * c).collect(),
        }
    }

    /// `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::dims("DenseMatrix::matmul (inner)", self.cols, rhs.rows));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        T::gemm(
            self.rows,
            self.cols,
            rhs.cols,
            &self.data,
            (self.cols, 1),
            &rhs.data,
            (rhs.cols, 1),
            &mut out.data,
        );
        Ok(out)
    }

    /// `selfᵀ · rhs` without materialising the transpose.
    pub fn t_matmul(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::dims("DenseMatrix::t_matmul (inner)", self.rows, rhs.rows));
        }
        let mut out = Self::zeros(self.cols, rhs.cols);
        T::gemm(
            self.cols,
            self.rows,
            rhs.cols,
            &self.data,
            (1, self.cols),
            &rhs.data,
            (rhs.cols, 1),
            &mut out.data,
        );
        Ok(out)
    }

    /// The Gram matrix `self · selfᵀ`.
    pub fn gram(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.rows);
        T::gemm(
            self.rows,
            self.cols,
            self.rows,
            &self.data,
            (self.cols, 1),
            &self.data,
            (1, self.cols),
            &mut out.data,
        );
        out
    }

    pub fn row_norms(&self) -> Vec<T> {
        (0..self.rows).map(|i| norm2(self.row(i))).collect()
    }

    pub fn frobenius_norm(&self) -> T {
        norm2(&self.data)
    }
}

#[inline]
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    // four independent accumulators let the loop vectorise
    let mut acc = [T::zero(); 4];
    let chunks = x.len() / 4;
    for c in 0..chunks {
        let b = 4 * c;
        acc[0] += x[b] * y[b];
        acc[1] += x[b + 1] * y[b + 1];
        acc[2] += x[b + 2] * y[b + 2];
        acc[3] += x[b + 3] * y[b + 3];
    }
    let mut tail = T::zero();
    for i in 4 * chunks..x.len() {
        tail += x[i] * y[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Sum of squares, accumulated left to right.
#[inline]
pub fn sq_norm2<T: Scalar>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |s, &v| s + v * v)
}

/// Euclidean norm. Every row-norm in the crate goes through this function so
/// that values reached by different routes agree bit for bit.
#[inline]
pub fn norm2<T: Scalar>(x: &[T]) -> T {
    sq_norm2(x).sqrt()
}

#[inline]
pub fn norm_inf<T: Scalar>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
}

/// Index of the largest entry; ties go to the smallest index.
pub fn argmax<T: Scalar>(x: &[T]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, &v) in x.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}
