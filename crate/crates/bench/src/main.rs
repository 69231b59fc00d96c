use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;
use twoinf_bench::config::{parse_budgets, parse_gap, parse_methods, parse_tall, SourceSpec};
use twoinf_bench::{csv, load_matrix, run_on_matrix, summarize, summary, ConfigLayer};

/// Relative-error-versus-matvec benchmark for two-to-infinity norm estimators.
///
/// Writes one CSV row per (method, budget, trial) and a summary table to stderr.
#[derive(Debug, Parser)]
#[command(name = "twoinf-bench", version)]
struct Cli {
    /// Flat key=value file; flags override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Synthetic gap matrix with d rows, n columns and gap DELTA.
    #[arg(long, num_args = 3, value_names = ["D", "N", "DELTA"], conflicts_with_all = ["tall", "load"])]
    gap: Option<Vec<String>>,

    /// Gaussian d×n matrix with d > n.
    #[arg(long, num_args = 2, value_names = ["D", "N"], conflicts_with = "load")]
    tall: Option<Vec<String>>,

    /// Matrix in the binary format written by --export-matrix.
    #[arg(long, value_name = "PATH")]
    load: Option<PathBuf>,

    /// Seed for synthetic matrices; defaults to --seed.
    #[arg(long)]
    matrix_seed: Option<u64>,

    /// Comma-separated methods: twinest, twinest_pp, rademacher_averaging, adaptive_power.
    #[arg(long)]
    methods: Option<String>,

    /// Comma-separated, strictly increasing matvec budgets.
    #[arg(long)]
    budgets: Option<String>,

    #[arg(long)]
    trials: Option<usize>,

    /// Base seed; trial t uses seed + t.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    workers: Option<usize>,

    /// CSV destination; stdout when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Drop the wall_ms column so replays compare byte for byte.
    #[arg(long)]
    no_walltime: bool,

    /// Add a coarse dense-FLOP column.
    #[arg(long)]
    flops: bool,

    /// Also write the benchmark matrix to this path.
    #[arg(long, value_name = "PATH")]
    export_matrix: Option<PathBuf>,
}

impl Cli {
    fn layer(&self) -> anyhow::Result<ConfigLayer> {
        let source = if let Some(g) = &self.gap {
            Some(parse_gap(&g.join(" "))?)
        } else if let Some(t) = &self.tall {
            Some(parse_tall(&t.join(" "))?)
        } else {
            self.load.clone().map(SourceSpec::Load)
        };
        Ok(ConfigLayer {
            source,
            matrix_seed: self.matrix_seed,
            methods: self.methods.as_deref().map(parse_methods).transpose()?,
            budgets: self.budgets.as_deref().map(parse_budgets).transpose()?,
            trials: self.trials,
            seed: self.seed,
            workers: self.workers,
            out: self.out.clone(),
            wall_time: self.no_walltime.then_some(false),
            flops: self.flops.then_some(true),
        })
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let base = match &cli.config {
        Some(path) => ConfigLayer::from_file(path)?,
        None => ConfigLayer::default(),
    };
    let cfg = base.merge(cli.layer()?).resolve()?;

    let mat = load_matrix(&cfg.source)?;
    if let Some(path) = &cli.export_matrix {
        twoinf::matio::write_matrix(path, &mat)?;
    }
    let out = run_on_matrix(&cfg, &mat)?;

    match &cfg.out {
        Some(path) => csv::write_csv_file(path, &out.records, cfg.wall_time, cfg.flops)?,
        None => csv::write_csv(std::io::stdout().lock(), &out.records, cfg.wall_time, cfg.flops)
            .context("writing CSV to stdout")?,
    }

    let mut err = std::io::stderr().lock();
    writeln!(
        err,
        "{}x{} matrix, exact two-to-infinity norm {:.16e}",
        out.shape.0, out.shape.1, out.exact
    )?;
    if !out.records.is_empty() {
        summary::write_table(&mut err, &summarize(&out.records)?)?;
    }
    Ok(())
}
