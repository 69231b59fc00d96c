//! Seeded trial ensembles over a bounded worker pool.

use std::time::Instant;

use rayon::prelude::*;
use twoinf::sketch::HutchppSplit;
use twoinf::{
    estimate, exact_two_to_inf, gen_gap_matrix, gen_tall_lowrank, matio, DenseMatrix, Diagnostic,
    LinearOp, Method, RngStream,
};

use crate::config::{BenchConfig, MatrixSource};
use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub matvec_budget: u64,
    pub trial: usize,
    pub seed: u64,
    pub estimate: f64,
    pub exact: f64,
    pub rel_error: f64,
    pub wall_ms: f64,
    /// Sample parameter derived from the budget.
    pub samples: usize,
    /// Matvecs actually consumed; may sit below the budget after rounding.
    pub matvecs_used: u64,
    pub flops: u64,
    pub diagnostic: Option<Diagnostic>,
}

impl BenchRecord {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        Self { wall_ms: 0.0, ..self.clone() } == Self { wall_ms: 0.0, ..other.clone() }
    }
}

/// A (method, budget) cell that could not run.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedCell {
    pub method: Method,
    pub matvec_budget: u64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    /// Sorted by (method, budget, trial).
    pub records: Vec<BenchRecord>,
    pub skipped: Vec<SkippedCell>,
    pub exact: f64,
    pub shape: (usize, usize),
}

pub fn load_matrix(source: &MatrixSource) -> Result<DenseMatrix<f64>> {
    Ok(match source {
        MatrixSource::Gap(spec) => gen_gap_matrix(spec)?,
        MatrixSource::Tall(spec) => gen_tall_lowrank(spec)?,
        MatrixSource::File(path) => matio::read_matrix(path)?,
    })
}

/// Loads the configured matrix, runs every trial and writes the CSV when an
/// output path is set.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchOutput> {
    cfg.validate()?;
    let mat = load_matrix(&cfg.source)?;
    let out = run_on_matrix(cfg, &mat)?;
    if let Some(path) = &cfg.out {
        crate::csv::write_csv_file(path, &out.records, cfg.wall_time, cfg.flops)?;
    }
    Ok(out)
}

/// Runs every trial of `cfg` against `mat`, ignoring `cfg.source`.
pub fn run_on_matrix(cfg: &BenchConfig, mat: &DenseMatrix<f64>) -> Result<BenchOutput> {
    cfg.validate()?;
    if mat.rows() == 0 || mat.cols() == 0 {
        return Err(BenchError::config("matrix has no entries"));
    }
    let exact = exact_two_to_inf(mat).value;

    let mut skipped = Vec::new();
    let mut items = Vec::new();
    for &method in &cfg.methods {
        for &budget in &cfg.budgets {
            match method.samples_for_budget(budget) {
                Some(m) => items.extend((0..cfg.trials).map(|t| (method, budget, m, t))),
                None => {
                    let cell = SkippedCell {
                        method,
                        matvec_budget: budget,
                        reason: format!(
                            "budget {budget} is below the {} matvecs needed for the minimum sample count {}",
                            method.matvec_cost(method.min_samples()),
                            method.min_samples()
                        ),
                    };
                    eprintln!("skipped,{},{},{}", cell.method, cell.matvec_budget, cell.reason);
                    skipped.push(cell);
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let mut records = pool.install(|| {
        items
            .par_iter()
            .map(|&(method, budget, m, trial)| run_trial(mat, exact, method, budget, m, trial, cfg.base_seed))
            .collect::<Result<Vec<_>>>()
    })?;
    records.sort_by_key(|r| (r.method, r.matvec_budget, r.trial));

    Ok(BenchOutput {
        records,
        skipped,
        exact,
        shape: mat.shape(),
    })
}

fn run_trial(
    mat: &DenseMatrix<f64>,
    exact: f64,
    method: Method,
    budget: u64,
    m: usize,
    trial: usize,
    base_seed: u64,
) -> Result<BenchRecord> {
    let seed = base_seed.wrapping_add(trial as u64);
    let op = mat.op();
    let mut rng = RngStream::new(seed);
    let before = op.matvecs();
    let start = Instant::now();
    let est = estimate(method, &op, m, &mut rng)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let counted = op.matvecs() - before;

    let expected = method.matvec_cost(m);
    // an adaptive power run that hit a zero iterate stops early and says so
    let model_holds = counted == expected || matches!(est.diagnostic, Some(Diagnostic::ZeroIterate { .. }));
    if counted != est.matvecs_used || !model_holds || counted > budget {
        return Err(BenchError::Accounting {
            method,
            budget,
            trial,
            expected,
            counted,
        });
    }

    let rel_error = relative_error(est.value, exact);
    Ok(BenchRecord {
        method,
        matvec_budget: budget,
        trial,
        seed,
        estimate: est.value,
        exact,
        rel_error,
        wall_ms,
        samples: m,
        matvecs_used: counted,
        flops: flop_estimate(method, m, counted, mat.rows(), mat.cols()),
        diagnostic: est.diagnostic,
    })
}

/// `|est − exact| / exact`; an exact value of zero gives 0 for a zero
/// estimate and +∞ otherwise.
pub fn relative_error(estimate: f64, exact: f64) -> f64 {
    let diff = (estimate - exact).abs();
    if exact == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / exact.abs()
    }
}

/// Coarse dense cost: 2dn per matvec, plus for the sketched method a QR of
/// the d×s sketch (2ds²) and a 4ds projection per residual sample.
pub fn flop_estimate(method: Method, m: usize, matvecs: u64, d: usize, n: usize) -> u64 {
    let (d64, n64) = (d as u64, n as u64);
    let mut flops = 2 * d64 * n64 * matvecs;
    if method == Method::TwinEstPlusPlus {
        if let Ok(split) = HutchppSplit::for_budget(m, d) {
            let s = split.sketch as u64;
            flops += 2 * d64 * s * s + 4 * d64 * s * split.residual as u64;
        }
    }
    flops
}
