//! Randomized diagonal estimation.
//!
//! [`hutchinson_diag`] averages `X ⊙ (B X)` over Rademacher probes.
//! [`hutchpp_diag`] first sketches the dominant range of `AAᵀ`, takes the
//! diagonal of that low-rank part exactly, and spends the remaining probes
//! on the deflated residual `AAᵀ(I − QQᵀ)`.
//!
//! Probes are generated one vector at a time from the stream and applied in
//! blocks of [`PROBE_BLOCK`] columns; the block size is fixed so results are
//! reproducible for a given seed.

use crate::dense::{dot, norm2, DenseMatrix};
use crate::error::{Error, Result};
use crate::op::{DeflatedGramOp, GramOp, LinearOp};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Probe vectors per block application.
pub const PROBE_BLOCK: usize = 32;

/// Relative residual below which a QR column counts as linearly dependent.
pub const QR_RANK_TOL: f64 = 1e-12;

/// Estimated diagonal of a square operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagEstimate<T> {
    pub values: Vec<T>,
    pub samples_used: usize,
}

pub fn rademacher_vector<T: Scalar>(dim: usize, rng: &mut RngStream) -> Result<Vec<T>> {
    if dim == 0 {
        return Err(Error::invalid("Rademacher vector dimension must be at least 1"));
    }
    let mut v = vec![T::zero(); dim];
    rng.fill_signs(&mut v);
    Ok(v)
}

/// A `rows × cols` block whose columns are successive Rademacher vectors.
pub fn rademacher_block<T: Scalar>(rows: usize, cols: usize, rng: &mut RngStream) -> DenseMatrix<T> {
    let mut block = DenseMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            block.set(i, j, rng.sign());
        }
    }
    block
}

/// Hutchinson estimate `(1/m) Σ Xᵢ ⊙ (op Xᵢ)` of `diag(op)`.
///
/// Consumes exactly `m` applications of `op`.
pub fn hutchinson_diag<T, O>(op: &O, m: usize, rng: &mut RngStream) -> Result<DiagEstimate<T>>
where
    T: Scalar,
    O: LinearOp<T> + ?Sized,
{
    if !op.is_square() {
        return Err(Error::NotSquare {
            rows: op.rows(),
            cols: op.cols(),
        });
    }
    if m == 0 {
        return Err(Error::invalid("Hutchinson estimator needs at least one sample"));
    }
    let d = op.rows();
    let mut acc = vec![T::zero(); d];
    let mut done = 0;
    while done < m {
        let b = PROBE_BLOCK.min(m - done);
        let probes = rademacher_block::<T>(d, b, rng);
        let images = op.apply_block(&probes)?;
        for (i, a) in acc.iter_mut().enumerate() {
            // probes are ±1, so x·y is a signed copy of y
            *a += dot(probes.row(i), images.row(i));
        }
        done += b;
    }
    let inv_m = T::one() / T::lit(m as f64);
    Ok(DiagEstimate {
        values: acc.into_iter().map(|a| a * inv_m).collect(),
        samples_used: m,
    })
}

/// Thin QR: an orthonormal `d × r` basis whose span contains the columns of
/// `mat`.
///
/// Modified Gram–Schmidt with a second orthogonalisation pass. A column whose
/// residual falls below [`QR_RANK_TOL`] of its original norm is replaced by
/// the standard basis vector least covered by the basis so far (smallest
/// index on ties), orthogonalised the same way, so the output always has `r`
/// orthonormal columns.
pub fn thin_qr<T: Scalar>(mat: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let (d, r) = mat.shape();
    if r > d {
        return Err(Error::invalid(format!(
            "thin QR needs at most as many columns as rows, got {d}x{r}"
        )));
    }
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(r);
    let tol = T::lit(QR_RANK_TOL);
    // coverage[i] = Σ_k q_k[i]², the squared norm of row i of Q so far
    let mut coverage = vec![T::zero(); d];
    for j in 0..r {
        let mut v = mat.column(j);
        let original = norm2(&v);
        orthogonalize(&mut v, &basis);
        let mut nrm = norm2(&v);
        if nrm.is_nan() || nrm <= tol * original || nrm == T::zero() {
            let pick = (0..d)
                .min_by(|&a, &b| coverage[a].partial_cmp(&coverage[b]).expect("finite"))
                .expect("d >= r >= 1");
            v = vec![T::zero(); d];
            v[pick] = T::one();
            orthogonalize(&mut v, &basis);
            nrm = norm2(&v);
        }
        let inv = T::one() / nrm;
        for (c, x) in coverage.iter_mut().zip(v.iter_mut()) {
            *x *= inv;
            *c += *x * *x;
        }
        basis.push(v);
    }
    let mut q = DenseMatrix::zeros(d, r);
    for (j, col) in basis.iter().enumerate() {
        q.set_column(j, col);
    }
    Ok(q)
}

fn orthogonalize<T: Scalar>(v: &mut [T], basis: &[Vec<T>]) {
    for _pass in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (x, &qi) in v.iter_mut().zip(q) {
                *x -= c * qi;
            }
        }
    }
}

/// `diag(AAᵀQQᵀ)` for orthonormal `Q`, as row-wise inner products of
/// `A(AᵀQ)` with `Q`. Costs `2r` matvecs.
pub fn lowrank_diag<T, O>(a: &O, q: &DenseMatrix<T>) -> Result<Vec<T>>
where
    T: Scalar,
    O: LinearOp<T> + ?Sized,
{
    if q.rows() != a.rows() {
        return Err(Error::dims("lowrank_diag (basis rows vs A rows)", a.rows(), q.rows()));
    }
    if q.cols() == 0 {
        return Ok(vec![T::zero(); a.rows()]);
    }
    let w = a.apply_transpose_block(q)?;
    let v = a.apply_block(&w)?;
    Ok((0..a.rows()).map(|i| dot(v.row(i), q.row(i))).collect())
}

/// How a budget of `m` Gram samples is divided by [`hutchpp_diag`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HutchppSplit {
    /// Sketch columns `s = min(⌊m/3⌋, d)`.
    pub sketch: usize,
    /// Residual Hutchinson samples, `m − 2s` (`m/3` plus any remainder).
    pub residual: usize,
}

impl HutchppSplit {
    /// Split for budget `m` on an operator with `d` rows. The sketch never
    /// exceeds `d` columns; surplus goes to the residual, so the total stays
    /// at `2m` matvecs.
    pub fn for_budget(m: usize, d: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::invalid(format!(
                "deflated diagonal estimator needs a budget of at least 3, got {m}"
            )));
        }
        let sketch = (m / 3).min(d);
        Ok(Self {
            sketch,
            residual: m - 2 * sketch,
        })
    }
}

/// Deflated diagonal estimate of `AAᵀ` using `2m` matvecs on `A`.
///
/// Draws the sketch `S` first, forms `Q = thin_qr(AAᵀS)`, adds the exact
/// low-rank diagonal to a Hutchinson estimate of the residual. The residual
/// average divides by the number of residual samples.
pub fn hutchpp_diag<T, O>(a: &O, m: usize, rng: &mut RngStream) -> Result<DiagEstimate<T>>
where
    T: Scalar,
    O: LinearOp<T> + ?Sized,
{
    let d = a.rows();
    let split = HutchppSplit::for_budget(m, d)?;
    let gram = GramOp::new(a);
    let sketch = rademacher_block::<T>(d, split.sketch, rng);
    let range = gram.apply_block(&sketch)?;
    let q = thin_qr(&range)?;
    let low = lowrank_diag(a, &q)?;
    let residual_op = DeflatedGramOp::new(a, q)?;
    let resid = hutchinson_diag(&residual_op, split.residual, rng)?;
    Ok(DiagEstimate {
        values: low.iter().zip(&resid.values).map(|(&l, &r)| l + r).collect(),
        samples_used: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::DenseOp;

    #[test]
    fn rademacher_is_reproducible_and_signed() {
        let v: Vec<f64> = rademacher_vector(4, &mut RngStream::new(3)).unwrap();
        let w: Vec<f64> = rademacher_vector(4, &mut RngStream::new(3)).unwrap();
        assert_eq!(v, w);
        assert!(v.iter().all(|&x| x == 1.0 || x == -1.0));
        assert!(rademacher_vector::<f64>(0, &mut RngStream::new(3)).is_err());
    }

    #[test]
    fn rademacher_mean_and_independence() {
        let mut rng = RngStream::new(11);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| rademacher_vector::<f64>(1, &mut rng).unwrap()[0]).sum::<f64>()
            / n as f64;
        assert!(mean.abs() <= 0.02, "mean {mean}");

        let n = 10_000;
        let mut s = [0.0f64; 5]; // Σx, Σy, Σxy, Σx², Σy²
        for _ in 0..n {
            let v = rademacher_vector::<f64>(2, &mut rng).unwrap();
            s[0] += v[0];
            s[1] += v[1];
            s[2] += v[0] * v[1];
            s[3] += v[0] * v[0];
            s[4] += v[1] * v[1];
        }
        let nf = n as f64;
        let cov = s[2] / nf - s[0] * s[1] / (nf * nf);
        let vx = s[3] / nf - (s[0] / nf).powi(2);
        let vy = s[4] / nf - (s[1] / nf).powi(2);
        let corr = cov / (vx * vy).sqrt();
        assert!(corr.abs() <= 0.05, "corr {corr}");
    }

    #[test]
    fn hutchinson_exact_on_diagonal_operators() {
        let d = DenseMatrix::from_diag(&[2.0, 1.0]);
        for m in [1, 3, 40] {
            let est = hutchinson_diag(&d.op(), m, &mut RngStream::new(m as u64)).unwrap();
            assert_eq!(est.values, vec![2.0, 1.0]);
            assert_eq!(est.samples_used, m);
        }
        let a = DenseMatrix::from_diag(&[2f64.sqrt(), 1.0]);
        let g = GramOp::new(a.op());
        let est = hutchinson_diag(&g, 5, &mut RngStream::new(0)).unwrap();
        assert!((est.values[0] - 2.0).abs() < 1e-15 && est.values[1] == 1.0);
        assert_eq!(g.matvecs(), 10);

        let id = DenseMatrix::<f64>::identity(6);
        let est = hutchinson_diag(&id.op(), 1, &mut RngStream::new(4)).unwrap();
        assert_eq!(est.values, vec![1.0; 6]);
    }

    #[test]
    fn hutchinson_on_all_ones_converges() {
        let ones = DenseMatrix::<f64>::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let est = hutchinson_diag(&ones.op(), 10_000, &mut RngStream::new(21)).unwrap();
        for v in est.values {
            assert!((v - 1.0).abs() <= 0.05, "{v}");
        }
    }

    #[test]
    fn hutchinson_errors() {
        let rect = DenseMatrix::<f64>::zeros(2, 3);
        assert!(matches!(
            hutchinson_diag(&rect.op(), 1, &mut RngStream::new(0)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
        let sq = DenseMatrix::<f64>::identity(2);
        assert!(hutchinson_diag(&sq.op(), 0, &mut RngStream::new(0)).is_err());
    }

    fn orthonormality_defect(q: &DenseMatrix<f64>) -> f64 {
        let qtq = q.t_matmul(q).unwrap();
        let mut s = 0.0;
        for i in 0..qtq.rows() {
            for j in 0..qtq.cols() {
                let t = if i == j { 1.0 } else { 0.0 };
                s += (qtq.get(i, j) - t).powi(2);
            }
        }
        s.sqrt()
    }

    #[test]
    fn qr_keeps_orthonormal_input() {
        let id = DenseMatrix::<f64>::identity(5);
        let first3 = DenseMatrix::from_fn(5, 3, |i, j| id.get(i, j));
        let q = thin_qr(&first3).unwrap();
        for (a, b) in q.data().iter().zip(first3.data()) {
            assert_eq!(a.abs(), *b);
        }
    }

    #[test]
    fn qr_completes_rank_deficient_input() {
        let m = DenseMatrix::<f64>::from_rows(&[[1.0, 2.0], [0.0, 0.0], [0.0, 0.0]]).unwrap();
        let q = thin_qr(&m).unwrap();
        assert_eq!(q.column(0).iter().map(|v| v.abs()).collect::<Vec<_>>(), vec![1.0, 0.0, 0.0]);
        assert_eq!(q.column(1), vec![0.0, 1.0, 0.0]);
        assert!(orthonormality_defect(&q) < 1e-14);

        let zeros = DenseMatrix::<f64>::zeros(4, 3);
        assert!(orthonormality_defect(&thin_qr(&zeros).unwrap()) < 1e-14);
    }

    #[test]
    fn qr_random_gaussian_reconstructs() {
        let mut rng = RngStream::new(99);
        let mut m = DenseMatrix::<f64>::zeros(30, 5);
        for i in 0..30 {
            for j in 0..5 {
                m.set(i, j, rng.standard_normal());
            }
        }
        let q = thin_qr(&m).unwrap();
        assert!(orthonormality_defect(&q) <= 1e-10);
        let proj = q.matmul(&q.t_matmul(&m).unwrap()).unwrap();
        let resid: f64 =
            m.data().iter().zip(proj.data()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(resid <= 1e-8 * m.frobenius_norm());
    }

    #[test]
    fn qr_rejects_wide_input() {
        assert!(thin_qr(&DenseMatrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn lowrank_diag_examples() {
        let a = DenseMatrix::from_diag(&[2.0, 1.0]);
        let q = DenseMatrix::from_rows(&[[1.0], [0.0]]).unwrap();
        let op = a.op();
        assert_eq!(lowrank_diag(&op, &q).unwrap(), vec![4.0, 0.0]);
        assert_eq!(op.matvecs(), 2);

        let empty = DenseMatrix::zeros(2, 0);
        assert_eq!(lowrank_diag(&op, &empty).unwrap(), vec![0.0, 0.0]);
        assert_eq!(op.matvecs(), 2);

        let wrong = DenseMatrix::zeros(3, 1);
        assert!(lowrank_diag(&op, &wrong).is_err());
    }

    #[test]
    fn hutchpp_identity_and_split() {
        // exact once the sketch spans the whole space (⌊m/3⌋ ≥ d)
        let id = DenseMatrix::<f64>::identity(3);
        for m in [9, 10, 11, 12, 30] {
            let op = DenseOp::new(&id);
            let est = hutchpp_diag(&op, m, &mut RngStream::new(m as u64)).unwrap();
            for v in &est.values {
                assert!((v - 1.0).abs() <= 1e-10, "m={m}: {v}");
            }
            assert_eq!(op.matvecs(), 2 * m as u64);
        }
        assert_eq!(HutchppSplit::for_budget(7, 10).unwrap(), HutchppSplit { sketch: 2, residual: 3 });
        assert_eq!(HutchppSplit::for_budget(30, 3).unwrap(), HutchppSplit { sketch: 3, residual: 24 });
        assert!(hutchpp_diag(&id.op(), 2, &mut RngStream::new(0)).is_err());
    }
}
