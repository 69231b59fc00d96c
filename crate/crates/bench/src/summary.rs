//! Per-(method, budget) aggregation of relative errors.

use std::collections::BTreeMap;
use std::io::Write;

use twoinf::Method;

use crate::error::{BenchError, Result};
use crate::runner::BenchRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub matvec_budget: u64,
    pub count: usize,
    pub mean: f64,
    /// Standard error of the mean; 0 for a single record.
    pub stderr: f64,
}

/// Rows ordered by method, then budget.
pub fn summarize(records: &[BenchRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    let mut groups: BTreeMap<(Method, u64), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((r.method, r.matvec_budget)).or_default().push(r.rel_error);
    }
    Ok(groups
        .into_iter()
        .map(|((method, matvec_budget), errs)| {
            let n = errs.len();
            let mean = errs.iter().sum::<f64>() / n as f64;
            let stderr = if n < 2 {
                0.0
            } else {
                let var = errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            };
            SummaryRow {
                method,
                matvec_budget,
                count: n,
                mean,
                stderr,
            }
        })
        .collect())
}

pub fn lookup(rows: &[SummaryRow], method: Method, budget: u64) -> Option<&SummaryRow> {
    rows.iter().find(|r| r.method == method && r.matvec_budget == budget)
}

pub fn write_table<W: Write>(mut w: W, rows: &[SummaryRow]) -> std::io::Result<()> {
    writeln!(w, "{:<22} {:>8} {:>6} {:>12} {:>12}", "method", "budget", "count", "mean_rel_err", "stderr")?;
    for r in rows {
        writeln!(
            w,
            "{:<22} {:>8} {:>6} {:>12.4e} {:>12.4e}",
            r.method.name(),
            r.matvec_budget,
            r.count,
            r.mean,
            r.stderr
        )?;
    }
    Ok(())
}
