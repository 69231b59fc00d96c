//! CSV output. Floats are written with 17 significant digits so a replay can
//! be compared byte for byte.

use std::io::Write;
use std::path::Path;

use crate::error::{BenchError, Result};
use crate::runner::BenchRecord;

pub fn header(wall_time: bool, flops: bool) -> String {
    let mut h = String::from("method,matvec_budget,trial,seed,estimate,exact,rel_error");
    if wall_time {
        h.push_str(",wall_ms");
    }
    if flops {
        h.push_str(",flops");
    }
    h
}

pub fn format_record(r: &BenchRecord, wall_time: bool, flops: bool) -> String {
    let mut line = format!(
        "{},{},{},{},{:.16e},{:.16e},{:.16e}",
        r.method, r.matvec_budget, r.trial, r.seed, r.estimate, r.exact, r.rel_error
    );
    if wall_time {
        line.push_str(&format!(",{:.16e}", r.wall_ms));
    }
    if flops {
        line.push_str(&format!(",{}", r.flops));
    }
    line
}

pub fn write_csv<W: Write>(mut w: W, records: &[BenchRecord], wall_time: bool, flops: bool) -> std::io::Result<()> {
    writeln!(w, "{}", header(wall_time, flops))?;
    for r in records {
        writeln!(w, "{}", format_record(r, wall_time, flops))?;
    }
    w.flush()
}

pub fn write_csv_file(path: &Path, records: &[BenchRecord], wall_time: bool, flops: bool) -> Result<()> {
    let io = |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    write_csv(std::io::BufWriter::new(file), records, wall_time, flops).map_err(io)
}
