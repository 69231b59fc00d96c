//! Matrix-free estimation of the two-to-infinity norm `‖A‖₂→∞` (largest row
//! norm) and the one-to-two norm `‖A‖₁→₂` (largest column norm).
//!
//! Everything is generic over [`Scalar`]; the `*F64` aliases below are the
//! concrete types the benchmark harness uses.
//!
//! ```
//! use twoinf::{estimators::twinest, DenseMatrixF64, RngStream};
//!
//! let a = DenseMatrixF64::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
//! let est = twinest(&a.op(), 16, &mut RngStream::new(7)).unwrap();
//! assert_eq!(est.value, 5.0);
//! assert_eq!(est.matvecs_used, 33);
//! ```

pub mod dense;
pub mod error;
pub mod estimators;
pub mod matio;
pub mod op;
pub mod rng;
pub mod scalar;
pub mod sketch;
pub mod synthetic;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use estimators::{
    adaptive_power, compute_gap, dual_vector, estimate, estimate_one_to_two, exact_one_to_two,
    exact_two_to_inf, rademacher_averaging, sufficient_m_twinest, twinest, twinest_pp, Diagnostic,
    DualNorm, GapReport, Method, NormEstimate,
};
pub use op::{DeflatedGramOp, DenseOp, GramOp, LinearOp, MatvecCounter, Transposed};
pub use rng::RngStream;
pub use scalar::Scalar;
pub use sketch::{hutchinson_diag, hutchpp_diag, lowrank_diag, rademacher_vector, thin_qr, DiagEstimate};
pub use synthetic::{gen_gap_matrix, gen_tall_lowrank, GapMatrixSpec, TallMatrixSpec};

pub type DenseMatrixF64 = DenseMatrix<f64>;
pub type DenseMatrixF32 = DenseMatrix<f32>;
pub type DiagEstimateF64 = DiagEstimate<f64>;
pub type NormEstimateF64 = NormEstimate<f64>;
pub type GapReportF64 = GapReport<f64>;
