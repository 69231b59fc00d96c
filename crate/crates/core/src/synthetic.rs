//! Synthetic test matrices.
//!
//! Gap matrices have Gaussian row directions rescaled to prescribed squared
//! norms `c = (1 + Δ, 1, c₃, …, c_d)` with `cᵢ ~ U[0, 1)` assigned in draw
//! order, so `‖A‖₂→∞ = √(1 + Δ)` is attained by row 0 alone and the row gap is
//! exactly `Δ`. Tall matrices are plain Gaussian `d × n` with `n < d`.
//!
//! Generation uses the seed XOR [`MATRIX_SEED_TAG`].

use crate::dense::{norm2, DenseMatrix};
use crate::error::{Error, Result};
use crate::rng::{RngStream, MATRIX_SEED_TAG};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapMatrixSpec {
    pub rows: usize,
    pub cols: usize,
    pub gap: f64,
    pub seed: u64,
}

impl GapMatrixSpec {
    pub fn new(rows: usize, cols: usize, gap: f64, seed: u64) -> Result<Self> {
        let spec = Self { rows, cols, gap, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 {
            return Err(Error::invalid(format!("gap matrix needs at least 2 rows, got {}", self.rows)));
        }
        if self.cols < 1 {
            return Err(Error::invalid("gap matrix needs at least 1 column"));
        }
        if !(self.gap > 0.0 && self.gap < 1.0) {
            return Err(Error::invalid(format!("gap must lie in (0, 1), got {}", self.gap)));
        }
        Ok(())
    }

    /// Target squared row norms are `1 + Δ`, `1`, then the uniform draws.
    pub fn exact_norm(&self) -> f64 {
        (1.0 + self.gap).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TallMatrixSpec {
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
}

impl TallMatrixSpec {
    pub fn new(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        let spec = Self { rows, cols, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rows > self.cols && self.cols >= 1) {
            return Err(Error::invalid(format!(
                "tall matrix needs rows > cols >= 1, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }
}

/// The gap-controlled matrix described in the module docs.
pub fn gen_gap_matrix<T: Scalar>(spec: &GapMatrixSpec) -> Result<DenseMatrix<T>> {
    spec.validate()?;
    let (d, n) = (spec.rows, spec.cols);
    let mut rng = RngStream::derived(spec.seed, MATRIX_SEED_TAG);
    let mut a = DenseMatrix::<T>::zeros(d, n);
    for i in 0..d {
        loop {
            rng.fill_normal(a.row_mut(i));
            if norm2(a.row(i)) > T::zero() {
                break;
            }
        }
    }
    let mut targets = Vec::with_capacity(d);
    targets.push(T::lit(1.0 + spec.gap));
    targets.push(T::one());
    for _ in 2..d {
        targets.push(rng.uniform());
    }
    for (i, c) in targets.into_iter().enumerate() {
        let scale = c.sqrt() / norm2(a.row(i));
        for v in a.row_mut(i) {
            *v *= scale;
        }
    }
    Ok(a)
}

/// A `d × n` matrix of independent standard normals.
pub fn gen_tall_lowrank<T: Scalar>(spec: &TallMatrixSpec) -> Result<DenseMatrix<T>> {
    spec.validate()?;
    let mut rng = RngStream::derived(spec.seed, MATRIX_SEED_TAG);
    let mut data = vec![T::zero(); spec.rows * spec.cols];
    rng.fill_normal(&mut data);
    DenseMatrix::new(spec.rows, spec.cols, data)
}
