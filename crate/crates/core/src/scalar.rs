//! Floating-point scalar abstraction.
//!
//! Every routine in this crate is generic over [`Scalar`]. `f64` is the
//! working precision for the estimators and the benchmark harness; `f32` is
//! supported for memory-bound use. Both route block products through
//! `matrixmultiply`, other implementors fall back to a plain triple loop.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real floating-point element type of matrices and vectors.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Writes `a · b` into the row-major, contiguous `c` (`m × n`).
    ///
    /// `a` is `m × k` and `b` is `k × n`, each addressed through a
    /// `(row_stride, col_stride)` pair so transposed views are free.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        a: &[Self],
        a_strides: (usize, usize),
        b: &[Self],
        b_strides: (usize, usize),
        c: &mut [Self],
    ) {
        check_gemm_bounds(m, k, n, a.len(), a_strides, b.len(), b_strides, c.len());
        for i in 0..m {
            let c_row = &mut c[i * n..(i + 1) * n];
            c_row.fill(Self::zero());
            for p in 0..k {
                let aip = a[i * a_strides.0 + p * a_strides.1];
                for (j, cij) in c_row.iter_mut().enumerate() {
                    *cij += aip * b[p * b_strides.0 + j * b_strides.1];
                }
            }
        }
    }

    /// Converts an `f64` literal or intermediate into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

#[allow(clippy::too_many_arguments)]
fn check_gemm_bounds(
    m: usize,
    k: usize,
    n: usize,
    a_len: usize,
    a_strides: (usize, usize),
    b_len: usize,
    b_strides: (usize, usize),
    c_len: usize,
) {
    let extent = |r: usize, c: usize, s: (usize, usize)| {
        if r == 0 || c == 0 {
            0
        } else {
            (r - 1) * s.0 + (c - 1) * s.1 + 1
        }
    };
    assert!(extent(m, k, a_strides) <= a_len, "gemm: lhs buffer too short");
    assert!(extent(k, n, b_strides) <= b_len, "gemm: rhs buffer too short");
    assert!(m * n <= c_len, "gemm: output buffer too short");
}

macro_rules! impl_scalar_blas {
    ($t:ty, $kernel:path) => {
        impl Scalar for $t {
            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                a: &[Self],
                a_strides: (usize, usize),
                b: &[Self],
                b_strides: (usize, usize),
                c: &mut [Self],
            ) {
                check_gemm_bounds(m, k, n, a.len(), a_strides, b.len(), b_strides, c.len());
                if m == 0 || n == 0 {
                    return;
                }
                if k == 0 {
                    c[..m * n].fill(0.0);
                    return;
                }
                // SAFETY: the bounds check above guarantees every strided
                // access lies inside the borrowed slices, and `c` is
                // exclusively borrowed.
                unsafe {
                    $kernel(
                        m,
                        k,
                        n,
                        1.0,
                        a.as_ptr(),
                        a_strides.0 as isize,
                        a_strides.1 as isize,
                        b.as_ptr(),
                        b_strides.0 as isize,
                        b_strides.1 as isize,
                        0.0,
                        c.as_mut_ptr(),
                        n as isize,
                        1,
                    );
                }
            }
        }
    };
}

impl_scalar_blas!(f64, matrixmultiply::dgemm);
impl_scalar_blas!(f32, matrixmultiply::sgemm);
