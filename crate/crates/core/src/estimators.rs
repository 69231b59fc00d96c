//! Two-to-infinity norm estimators.
//!
//! `‖A‖₂→∞` is the largest row norm of `A`, i.e. the square root of the
//! largest diagonal entry of `AAᵀ`. The randomized estimators here estimate
//! that diagonal with [`hutchinson_diag`] or [`hutchpp_diag`], pick the row
//! that looks largest and then measure that row exactly with one `Aᵀe_j`
//! product, so their answer is always the true norm of some row.
//!
//! [`adaptive_power`] is the fixed-point iteration baseline;
//! [`rademacher_averaging`] reports the estimated maximum directly.

use std::fmt;
use std::str::FromStr;

use crate::dense::{argmax, norm2, norm_inf, sq_norm2, DenseMatrix};
use crate::error::{Error, Result};
use crate::op::{GramOp, LinearOp, Transposed};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sketch::{hutchinson_diag, hutchpp_diag};

/// Relative tie band used by [`compute_gap`] when none is given.
pub const DEFAULT_TIE_TOL: f64 = 1e-12;

/// Something that went wrong without invalidating the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagnostic {
    /// The power iteration produced a zero vector at the given (1-based)
    /// iteration; the estimate is the last available one.
    ZeroIterate { iteration: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate<T> {
    pub value: T,
    /// Row whose exact norm was returned, for row-selecting methods.
    pub selected_row: Option<usize>,
    pub matvecs_used: u64,
    pub diagnostic: Option<Diagnostic>,
}

impl<T> NormEstimate<T> {
    fn new(value: T, selected_row: Option<usize>, matvecs_used: u64) -> Self {
        Self {
            value,
            selected_row,
            matvecs_used,
            diagnostic: None,
        }
    }
}

/// Row-norm gap of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport<T> {
    /// Largest squared row norm `M`.
    pub max_sq_norm: T,
    /// `M` minus the largest squared row norm outside the tie band; `+∞` when
    /// every row ties.
    pub gap: T,
    /// Rows within the tie band of `M`, ascending.
    pub argmax_set: Vec<usize>,
}

impl<T: Scalar> GapReport<T> {
    pub fn all_tie(&self) -> bool {
        self.gap.is_infinite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    TwinEst,
    TwinEstPlusPlus,
    RademacherAveraging,
    AdaptivePower,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::TwinEst,
        Method::TwinEstPlusPlus,
        Method::RademacherAveraging,
        Method::AdaptivePower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::TwinEst => "twinest",
            Method::TwinEstPlusPlus => "twinest_pp",
            Method::RademacherAveraging => "rademacher_averaging",
            Method::AdaptivePower => "adaptive_power",
        }
    }

    /// Smallest admissible sample / iteration parameter.
    pub fn min_samples(self) -> usize {
        match self {
            Method::TwinEstPlusPlus => 3,
            _ => 1,
        }
    }

    /// Matvecs consumed for parameter `m` (non-degenerate runs).
    pub fn matvec_cost(self, m: usize) -> u64 {
        let m = m as u64;
        match self {
            Method::TwinEst | Method::TwinEstPlusPlus | Method::AdaptivePower => 2 * m + 1,
            Method::RademacherAveraging => 2 * m,
        }
    }

    /// Largest parameter whose cost fits in `budget` matvecs, or `None` if
    /// not even the minimum fits. TwINEst++ is rounded down to a multiple
    /// of three.
    pub fn samples_for_budget(self, budget: u64) -> Option<usize> {
        let m = match self {
            Method::TwinEst | Method::AdaptivePower => budget.saturating_sub(1) / 2,
            Method::TwinEstPlusPlus => budget.saturating_sub(1) / 2 / 3 * 3,
            Method::RademacherAveraging => budget / 2,
        } as usize;
        (m >= self.min_samples()).then_some(m)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown method '{s}' (expected one of twinest, twinest_pp, rademacher_averaging, adaptive_power)"
                ))
            })
    }
}

/// Exact `‖A‖₂→∞` from the entries: the largest row norm, first row on ties.
pub fn exact_two_to_inf<T: Scalar>(mat: &DenseMatrix<T>) -> NormEstimate<T> {
    let norms = mat.row_norms();
    let row = argmax(&norms);
    NormEstimate::new(row.map_or(T::zero(), |j| norms[j]), row, 0)
}

/// Exact `‖A‖₁→₂`, the largest column norm.
pub fn exact_one_to_two<T: Scalar>(mat: &DenseMatrix<T>) -> NormEstimate<T> {
    exact_two_to_inf(&mat.transpose())
}

/// `‖Aᵀe_j‖₂`, one transpose matvec.
fn measured_row_norm<T: Scalar, O: LinearOp<T> + ?Sized>(a: &O, j: usize) -> Result<T> {
    let mut e = vec![T::zero(); a.rows()];
    e[j] = T::one();
    Ok(norm2(&a.apply_transpose(&e)?))
}

fn select_row<T: Scalar, O: LinearOp<T> + ?Sized>(a: &O, diag: &[T]) -> Result<(usize, T)> {
    let j = argmax(diag).ok_or_else(|| Error::invalid("operator has no rows"))?;
    Ok((j, measured_row_norm(a, j)?))
}

/// TwINEst: Hutchinson estimate of `diag(AAᵀ)` from `m` probes, then the
/// exact norm of the arg-max row. Costs `2m + 1` matvecs.
pub fn twinest<T, O>(a: &O, m: usize, rng: &mut RngStream) -> Result<NormEstimate<T>>
where
    T: Scalar,
    O: LinearOp<T> + ?Sized,
{
    if m == 0 {
        return Err(Error::invalid("twinest needs m >= 1"));
    }
    let diag = hutchinson_diag(&GramOp::new(a), m, rng)?;
    let (j, value) = select_row(a, &diag.values)?;
    Ok(NormEstimate::new(value, Some(j), Method::TwinEst.matvec_cost(m)))
}

/// TwINEst++: as [`twinest`] but with the deflated estimator
/// [`hutchpp_diag`] on a total budget of `m` Gram samples. Costs `2m + 1`.
pub fn twinest_pp<T, O>(a: &O, m: usize, rng: &mut RngStream) -> Result<NormEstimate<T>>
where
    T: Scalar,
    O: LinearOp<T> + ?Sized,
{
    if m < 3 {
        return Err(Error::invalid(format!("twinest_pp needs m >= 3, got {m}")));
    }
    let diag = hutchpp_diag(a, m, rng)?;
    let (j, value) = select_row(a, &diag.values)?;
    Ok(NormEstimate::new(value, Some(j), Method::TwinEstPlusPlus.matvec_cost(m)))
}

/// `√max(0, maxᵢ Dᵢ)` for the Hutchinson diagonal `D` of `AAᵀ`; no row is
/// measured. Costs `2m`.
pub fn rademacher_averaging<T, O>(a: &O, m: usize, rng: &mut RngStream) -> Result<NormEstimate<T>>
where
    T: Scalar,
    O: LinearOp<T> + ?Sized,
{
    if m == 0 {
        return Err(Error::invalid("rademacher_averaging needs m >= 1"));
    }
    let diag = hutchinson_diag(&GramOp::new(a), m, rng)?;
    let top = diag.values.iter().fold(T::neg_infinity(), |acc, &v| acc.max(v));
    Ok(NormEstimate::new(
        top.max(T::zero()).sqrt(),
        None,
        Method::RademacherAveraging.matvec_cost(m),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualNorm {
    Two,
    Inf,
}

/// Dual vector of `x` for the ℓ₂ or ℓ∞ norm.
///
/// `dual₂(x) = x/‖x‖₂`. `dual∞(x)` spreads `sign(xᵢ)/|I|` over the set `I` of
/// coordinates whose magnitude equals `‖x‖∞` exactly.
pub fn dual_vector<T: Scalar>(x: &[T], p: DualNorm) -> Result<Vec<T>> {
    let peak = norm_inf(x);
    if peak == T::zero() {
        return Err(Error::Undefined("dual of the zero vector".into()));
    }
    Ok(match p {
        DualNorm::Two => {
            let n = norm2(x);
            x.iter().map(|&v| v / n).collect()
        }
        DualNorm::Inf => {
            let count = x.iter().filter(|v| v.abs() == peak).count();
            let w = T::one() / T::lit(count as f64);
            x.iter()
                .map(|&v| if v.abs() == peak { w.copysign(v) } else { T::zero() })
                .collect()
        }
    })
}

/// Adaptive power iteration for `‖A‖₂→∞` from a Gaussian start:
/// `Y = dual∞(AX)`, `X = dual₂(AᵀY)`, `m` times, then `‖AX‖∞`.
///
/// Costs `2m + 1` matvecs. If an iterate vanishes the last available
/// estimate is returned with [`Diagnostic::ZeroIterate`].
pub fn adaptive_power<T, O>(a: &O, m: usize, rng: &mut RngStream) -> Result<NormEstimate<T>>
where
    T: Scalar,
    O: LinearOp<T> + ?Sized,
{
    if m == 0 {
        return Err(Error::invalid("adaptive_power needs m >= 1"));
    }
    let mut x = vec![T::zero(); a.cols()];
    rng.fill_normal(&mut x);
    let mut used = 0u64;
    let stalled = |value: T, used: u64, iteration: usize| {
        let mut est = NormEstimate::new(value, None, used);
        est.diagnostic = Some(Diagnostic::ZeroIterate { iteration });
        Ok(est)
    };
    for it in 1..=m {
        let ax = a.apply(&x)?;
        used += 1;
        let current = norm_inf(&ax);
        if current == T::zero() {
            return stalled(current, used, it);
        }
        let y = dual_vector(&ax, DualNorm::Inf)?;
        let aty = a.apply_transpose(&y)?;
        used += 1;
        if norm_inf(&aty) == T::zero() {
            return stalled(current, used, it);
        }
        x = dual_vector(&aty, DualNorm::Two)?;
    }
    let ax = a.apply(&x)?;
    used += 1;
    Ok(NormEstimate::new(norm_inf(&ax), None, used))
}

/// Runs `method` with parameter `m` on `a`.
pub fn estimate<T, O>(method: Method, a: &O, m: usize, rng: &mut RngStream) -> Result<NormEstimate<T>>
where
    T: Scalar,
    O: LinearOp<T> + ?Sized,
{
    match method {
        Method::TwinEst => twinest(a, m, rng),
        Method::TwinEstPlusPlus => twinest_pp(a, m, rng),
        Method::RademacherAveraging => rademacher_averaging(a, m, rng),
        Method::AdaptivePower => adaptive_power(a, m, rng),
    }
}

/// Estimates `‖A‖₁→₂ = ‖Aᵀ‖₂→∞` by running `method` on the transposed
/// operator; `selected_row` then indexes a column of `A`.
pub fn estimate_one_to_two<T, O>(a: &O, method: Method, m: usize, rng: &mut RngStream) -> Result<NormEstimate<T>>
where
    T: Scalar,
    O: LinearOp<T>,
{
    estimate(method, &Transposed::new(a), m, rng)
}

/// Largest squared row norm, the rows tying with it, and the gap to the
/// next distinct value. Rows within `tie_tol · max(1, M)` of `M` tie.
pub fn compute_gap<T: Scalar>(mat: &DenseMatrix<T>, tie_tol: T) -> Result<GapReport<T>> {
    if mat.rows() == 0 {
        return Err(Error::invalid("gap of a matrix with no rows"));
    }
    if tie_tol.is_nan() || tie_tol < T::zero() {
        return Err(Error::invalid("tie tolerance must be non-negative"));
    }
    let sq: Vec<T> = (0..mat.rows()).map(|i| sq_norm2(mat.row(i))).collect();
    let max = sq.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let band = tie_tol * max.max(T::one());
    let mut argmax_set = Vec::new();
    let mut below = T::neg_infinity();
    for (i, &s) in sq.iter().enumerate() {
        if max - s <= band {
            argmax_set.push(i);
        } else {
            below = below.max(s);
        }
    }
    let gap = if below == T::neg_infinity() {
        T::infinity()
    } else {
        max - below
    };
    Ok(GapReport {
        max_sq_norm: max,
        gap,
        argmax_set,
    })
}

/// Smallest integer `m` strictly above
/// `8 ln(2d/δ) ‖AAᵀ − diag(AAᵀ)‖²₂→∞ / Δ²`, the sample count that makes
/// [`twinest`] return the exact norm with probability at least `1 − δ`.
///
/// Forms `AAᵀ` densely; meant for test-scale matrices.
pub fn sufficient_m_twinest<T: Scalar>(mat: &DenseMatrix<T>, delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!("failure probability must lie in (0, 1], got {delta}")));
    }
    let report = compute_gap(mat, T::lit(DEFAULT_TIE_TOL))?;
    if report.all_tie() {
        return Err(Error::Undefined(
            "oracle-complexity bound: every row attains the maximum norm, so the gap is zero".into(),
        ));
    }
    let off = off_diagonal_sq_two_to_inf(&mat.gram()).to_f64_lossy();
    let d = mat.rows() as f64;
    let gap = report.gap.to_f64_lossy();
    let bound = 8.0 * (2.0 * d / delta).ln() * off / (gap * gap);
    Ok(bound.floor() as u64 + 1)
}

/// `‖B − diag(B)‖²₂→∞` for square `B`.
fn off_diagonal_sq_two_to_inf<T: Scalar>(b: &DenseMatrix<T>) -> T {
    (0..b.rows())
        .map(|i| {
            let row = b.row(i);
            sq_norm2(row) - row[i] * row[i]
        })
        .fold(T::zero(), |a, v| a.max(v))
}
