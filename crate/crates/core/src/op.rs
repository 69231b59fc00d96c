//! Matrix-free operator contract.
//!
//! Estimators never read matrix entries; they see a [`LinearOp`] that can
//! multiply by `A` and by `Aᵀ` and that counts every such call. One call to
//! `apply` or `apply_transpose` costs one matvec. A block application on a
//! `k`-column block costs `k`. Dense projection arithmetic done alongside an
//! operator (the deflation in [`DeflatedGramOp`]) costs nothing.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::dense::{dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Thread-safe matvec tally.
#[derive(Debug, Default)]
pub struct MatvecCounter(AtomicU64);

impl MatvecCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }

    #[inline]
    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

impl Clone for MatvecCounter {
    fn clone(&self) -> Self {
        Self(AtomicU64::new(self.get()))
    }
}

/// Oracle access to `x ↦ Ax` and `y ↦ Aᵀy` for a `rows × cols` operator.
///
/// Blocks are row-major [`DenseMatrix`] values whose columns are the vectors;
/// the default block methods loop over columns. Implementations must keep
/// [`LinearOp::matvecs`] equal to the number of vector products performed.
pub trait LinearOp<T: Scalar>: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;

    /// `Ax` for `x` of length `cols`.
    fn apply(&self, x: &[T]) -> Result<Vec<T>>;

    /// `Aᵀy` for `y` of length `rows`.
    fn apply_transpose(&self, y: &[T]) -> Result<Vec<T>>;

    /// `AX` for a `cols × k` block.
    fn apply_block(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        columnwise(x, self.cols(), self.rows(), "LinearOp::apply_block", |c| self.apply(c))
    }

    /// `AᵀY` for a `rows × k` block.
    fn apply_transpose_block(&self, y: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        columnwise(y, self.rows(), self.cols(), "LinearOp::apply_transpose_block", |c| {
            self.apply_transpose(c)
        })
    }

    /// Total matvecs consumed so far on the underlying oracle.
    fn matvecs(&self) -> u64;

    fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }
}

fn columnwise<T: Scalar>(
    block: &DenseMatrix<T>,
    in_dim: usize,
    out_dim: usize,
    context: &'static str,
    mut f: impl FnMut(&[T]) -> Result<Vec<T>>,
) -> Result<DenseMatrix<T>> {
    if block.rows() != in_dim {
        return Err(Error::dims(context, in_dim, block.rows()));
    }
    let mut out = DenseMatrix::zeros(out_dim, block.cols());
    for j in 0..block.cols() {
        out.set_column(j, &f(&block.column(j))?);
    }
    Ok(out)
}

impl<T: Scalar, O: LinearOp<T> + ?Sized> LinearOp<T> for &O {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        (**self).apply(x)
    }
    fn apply_transpose(&self, y: &[T]) -> Result<Vec<T>> {
        (**self).apply_transpose(y)
    }
    fn apply_block(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        (**self).apply_block(x)
    }
    fn apply_transpose_block(&self, y: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        (**self).apply_transpose_block(y)
    }
    fn matvecs(&self) -> u64 {
        (**self).matvecs()
    }
}

/// A borrowed dense matrix exposed as a counting oracle.
///
/// Each `DenseOp` owns its counter, so independent trials over one shared
/// matrix keep separate, exact tallies.
#[derive(Debug, Clone)]
pub struct DenseOp<'a, T> {
    mat: &'a DenseMatrix<T>,
    counter: MatvecCounter,
}

impl<'a, T: Scalar> DenseOp<'a, T> {
    pub fn new(mat: &'a DenseMatrix<T>) -> Self {
        Self {
            mat,
            counter: MatvecCounter::new(),
        }
    }

    pub fn matrix(&self) -> &'a DenseMatrix<T> {
        self.mat
    }
}

impl<T: Scalar> DenseMatrix<T> {
    /// Counting oracle view of this matrix.
    pub fn op(&self) -> DenseOp<'_, T> {
        DenseOp::new(self)
    }
}

impl<T: Scalar> LinearOp<T> for DenseOp<'_, T> {
    fn rows(&self) -> usize {
        self.mat.rows()
    }

    fn cols(&self) -> usize {
        self.mat.cols()
    }

    fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.mat.cols() {
            return Err(Error::dims("dense apply (x length vs cols)", self.mat.cols(), x.len()));
        }
        self.counter.add(1);
        Ok((0..self.mat.rows()).map(|i| dot(self.mat.row(i), x)).collect())
    }

    fn apply_transpose(&self, y: &[T]) -> Result<Vec<T>> {
        if y.len() != self.mat.rows() {
            return Err(Error::dims(
                "dense apply_transpose (y length vs rows)",
                self.mat.rows(),
                y.len(),
            ));
        }
        self.counter.add(1);
        // Same association as `dot`: rows are split into four interleaved
        // partial sums plus a tail, so Aᵀy rounds exactly like (Aᵀ)y on a
        // materialised transpose.
        let n = self.mat.cols();
        let mut acc = vec![vec![T::zero(); n]; 4];
        let chunks = y.len() / 4;
        for c in 0..chunks {
            for (lane, part) in acc.iter_mut().enumerate() {
                let i = 4 * c + lane;
                let yi = y[i];
                for (o, &a) in part.iter_mut().zip(self.mat.row(i)) {
                    *o += a * yi;
                }
            }
        }
        let mut tail = vec![T::zero(); n];
        for (i, &yi) in y.iter().enumerate().skip(4 * chunks) {
            for (o, &a) in tail.iter_mut().zip(self.mat.row(i)) {
                *o += a * yi;
            }
        }
        Ok((0..n)
            .map(|j| (acc[0][j] + acc[1][j]) + (acc[2][j] + acc[3][j]) + tail[j])
            .collect())
    }

    fn apply_block(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if x.rows() != self.mat.cols() {
            return Err(Error::dims("dense apply_block (block rows vs cols)", self.mat.cols(), x.rows()));
        }
        self.counter.add(x.cols() as u64);
        self.mat.matmul(x)
    }

    fn apply_transpose_block(&self, y: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if y.rows() != self.mat.rows() {
            return Err(Error::dims(
                "dense apply_transpose_block (block rows vs rows)",
                self.mat.rows(),
                y.rows(),
            ));
        }
        self.counter.add(y.cols() as u64);
        self.mat.t_matmul(y)
    }

    fn matvecs(&self) -> u64 {
        self.counter.get()
    }
}

/// `Aᵀ` as an operator: `apply` and `apply_transpose` swap, shapes swap,
/// the matvec tally is the inner one.
#[derive(Debug, Clone)]
pub struct Transposed<O> {
    inner: O,
}

impl<O> Transposed<O> {
    pub fn new(inner: O) -> Self {
        Self { inner }
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<T: Scalar, O: LinearOp<T>> LinearOp<T> for Transposed<O> {
    fn rows(&self) -> usize {
        self.inner.cols()
    }
    fn cols(&self) -> usize {
        self.inner.rows()
    }
    fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        self.inner.apply_transpose(x)
    }
    fn apply_transpose(&self, y: &[T]) -> Result<Vec<T>> {
        self.inner.apply(y)
    }
    fn apply_block(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        self.inner.apply_transpose_block(x)
    }
    fn apply_transpose_block(&self, y: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        self.inner.apply_block(y)
    }
    fn matvecs(&self) -> u64 {
        self.inner.matvecs()
    }
}

/// The Gram operator `B = AAᵀ`, square of side `A.rows()`, symmetric PSD.
/// One application costs two matvecs on `A`.
#[derive(Debug, Clone)]
pub struct GramOp<O> {
    inner: O,
}

impl<O> GramOp<O> {
    pub fn new(inner: O) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<T: Scalar, O: LinearOp<T>> LinearOp<T> for GramOp<O> {
    fn rows(&self) -> usize {
        self.inner.rows()
    }
    fn cols(&self) -> usize {
        self.inner.rows()
    }
    fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.inner.rows() {
            return Err(Error::dims("gram apply (x length vs side)", self.inner.rows(), x.len()));
        }
        self.inner.apply(&self.inner.apply_transpose(x)?)
    }
    fn apply_transpose(&self, y: &[T]) -> Result<Vec<T>> {
        self.apply(y)
    }
    fn apply_block(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if x.rows() != self.inner.rows() {
            return Err(Error::dims("gram apply_block (block rows vs side)", self.inner.rows(), x.rows()));
        }
        self.inner.apply_block(&self.inner.apply_transpose_block(x)?)
    }
    fn apply_transpose_block(&self, y: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        self.apply_block(y)
    }
    fn matvecs(&self) -> u64 {
        self.inner.matvecs()
    }
}

/// Orthonormality tolerance on `QᵀQ − I` (max entry).
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// The residual Gram operator `AAᵀ(I − QQᵀ)` for an orthonormal basis `Q`
/// (`d × r`, possibly `r = 0`).
#[derive(Debug, Clone)]
pub struct DeflatedGramOp<T, O> {
    gram: GramOp<O>,
    basis: DenseMatrix<T>,
}

impl<T: Scalar, O: LinearOp<T>> DeflatedGramOp<T, O> {
    /// Fails unless `basis` has `A.rows()` rows and orthonormal columns.
    pub fn new(inner: O, basis: DenseMatrix<T>) -> Result<Self> {
        if basis.rows() != inner.rows() {
            return Err(Error::dims("DeflatedGramOp basis rows vs A rows", inner.rows(), basis.rows()));
        }
        let qtq = basis.t_matmul(&basis)?;
        let tol = T::lit(ORTHONORMAL_TOL);
        for i in 0..qtq.rows() {
            for j in 0..qtq.cols() {
                let target = if i == j { T::one() } else { T::zero() };
                if (qtq.get(i, j) - target).abs() > tol {
                    return Err(Error::invalid(format!(
                        "deflation basis is not orthonormal: (QᵀQ)[{i},{j}] = {}",
                        qtq.get(i, j)
                    )));
                }
            }
        }
        Ok(Self {
            gram: GramOp::new(inner),
            basis,
        })
    }

    pub fn basis(&self) -> &DenseMatrix<T> {
        &self.basis
    }

    /// `x − Q(Qᵀx)`.
    fn project_out(&self, x: &[T]) -> Vec<T> {
        let q = &self.basis;
        let r = q.cols();
        if r == 0 {
            return x.to_vec();
        }
        let mut coeffs = vec![T::zero(); r];
        for (i, &xi) in x.iter().enumerate() {
            for (c, &qij) in coeffs.iter_mut().zip(q.row(i)) {
                *c += qij * xi;
            }
        }
        x.iter()
            .enumerate()
            .map(|(i, &xi)| xi - dot(q.row(i), &coeffs))
            .collect()
    }

    fn project_out_block(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if self.basis.cols() == 0 {
            return Ok(x.clone());
        }
        let proj = self.basis.matmul(&self.basis.t_matmul(x)?)?;
        let data = x.data().iter().zip(proj.data()).map(|(&a, &b)| a - b).collect();
        DenseMatrix::new(x.rows(), x.cols(), data)
    }
}

impl<T: Scalar, O: LinearOp<T>> LinearOp<T> for DeflatedGramOp<T, O> {
    fn rows(&self) -> usize {
        self.gram.rows()
    }
    fn cols(&self) -> usize {
        self.gram.cols()
    }
    fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.basis.rows() {
            return Err(Error::dims("deflated apply (x length vs basis rows)", self.basis.rows(), x.len()));
        }
        self.gram.apply(&self.project_out(x))
    }
    fn apply_transpose(&self, y: &[T]) -> Result<Vec<T>> {
        // (AAᵀ(I − P))ᵀ = (I − P)AAᵀ
        let by = self.gram.apply(y)?;
        Ok(self.project_out(&by))
    }
    fn apply_block(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if x.rows() != self.basis.rows() {
            return Err(Error::dims(
                "deflated apply_block (block rows vs basis rows)",
                self.basis.rows(),
                x.rows(),
            ));
        }
        self.gram.apply_block(&self.project_out_block(x)?)
    }
    fn apply_transpose_block(&self, y: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let by = self.gram.apply_block(y)?;
        self.project_out_block(&by)
    }
    fn matvecs(&self) -> u64 {
        self.gram.matvecs()
    }
}
