//! Benchmark configuration.
//!
//! Settings come from an optional flat `key = value` file and from command
//! line flags; flags win. Keys mirror the flag names:
//!
//! ```text
//! # comment
//! gap = 500 500 0.1          # or: tall = 2000 50   /   load = matrix.bin
//! matrix-seed = 7
//! methods = twinest,twinest_pp,rademacher_averaging,adaptive_power
//! budgets = 10,50,100,200,400,800
//! trials = 200
//! seed = 0
//! workers = 4
//! out = results.csv
//! no-walltime = true
//! flops = false
//! ```

use std::path::{Path, PathBuf};

use twoinf::{GapMatrixSpec, Method, TallMatrixSpec};

use crate::error::{BenchError, Result};

pub const DEFAULT_BUDGETS: [u64; 6] = [10, 50, 100, 200, 400, 800];
pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    Gap(GapMatrixSpec),
    Tall(TallMatrixSpec),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub source: MatrixSource,
    pub methods: Vec<Method>,
    /// Matvec budgets, strictly increasing.
    pub budgets: Vec<u64>,
    pub trials: usize,
    /// Trial `t` runs with seed `base_seed + t`.
    pub base_seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    /// Emit the `wall_ms` column.
    pub wall_time: bool,
    /// Emit the coarse `flops` column.
    pub flops: bool,
}

impl BenchConfig {
    pub fn new(source: MatrixSource) -> Self {
        Self {
            source,
            methods: Method::ALL.to_vec(),
            budgets: DEFAULT_BUDGETS.to_vec(),
            trials: DEFAULT_TRIALS,
            base_seed: 0,
            workers: default_workers(),
            out: None,
            wall_time: true,
            flops: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(BenchError::config("no methods selected"));
        }
        if self.budgets.is_empty() {
            return Err(BenchError::config("no budgets given"));
        }
        if let Some(w) = self.budgets.windows(2).find(|w| w[0] >= w[1]) {
            return Err(BenchError::config(format!(
                "budgets must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if self.trials == 0 {
            return Err(BenchError::config("trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(BenchError::config("workers must be at least 1"));
        }
        match &self.source {
            MatrixSource::Gap(s) => s.validate()?,
            MatrixSource::Tall(s) => s.validate()?,
            MatrixSource::File(_) => {}
        }
        Ok(())
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Matrix source before the matrix seed is known.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Gap { rows: usize, cols: usize, gap: f64 },
    Tall { rows: usize, cols: usize },
    Load(PathBuf),
}

/// One layer of optional settings; later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub source: Option<SourceSpec>,
    pub matrix_seed: Option<u64>,
    pub methods: Option<Vec<Method>>,
    pub budgets: Option<Vec<u64>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub wall_time: Option<bool>,
    pub flops: Option<bool>,
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| BenchError::config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut layer = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| BenchError::config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let at = |e: BenchError| BenchError::config(format!("line {}: {e}", lineno + 1));
            match key {
                "gap" => layer.source = Some(parse_gap(value).map_err(at)?),
                "tall" => layer.source = Some(parse_tall(value).map_err(at)?),
                "load" => layer.source = Some(SourceSpec::Load(PathBuf::from(value))),
                "matrix-seed" => layer.matrix_seed = Some(parse_num(key, value).map_err(at)?),
                "methods" => layer.methods = Some(parse_methods(value).map_err(at)?),
                "budgets" => layer.budgets = Some(parse_budgets(value).map_err(at)?),
                "trials" => layer.trials = Some(parse_num(key, value).map_err(at)?),
                "seed" => layer.seed = Some(parse_num(key, value).map_err(at)?),
                "workers" => layer.workers = Some(parse_num(key, value).map_err(at)?),
                "out" => layer.out = Some(PathBuf::from(value)),
                "no-walltime" => layer.wall_time = Some(!parse_bool(key, value).map_err(at)?),
                "flops" => layer.flops = Some(parse_bool(key, value).map_err(at)?),
                other => return Err(at(BenchError::config(format!("unknown key '{other}'")))),
            }
        }
        Ok(layer)
    }

    /// `other` wins wherever it is set.
    pub fn merge(self, other: Self) -> Self {
        Self {
            source: other.source.or(self.source),
            matrix_seed: other.matrix_seed.or(self.matrix_seed),
            methods: other.methods.or(self.methods),
            budgets: other.budgets.or(self.budgets),
            trials: other.trials.or(self.trials),
            seed: other.seed.or(self.seed),
            workers: other.workers.or(self.workers),
            out: other.out.or(self.out),
            wall_time: other.wall_time.or(self.wall_time),
            flops: other.flops.or(self.flops),
        }
    }

    /// Fills defaults. The matrix seed defaults to the trial base seed.
    pub fn resolve(self) -> Result<BenchConfig> {
        let seed = self.seed.unwrap_or(0);
        let matrix_seed = self.matrix_seed.unwrap_or(seed);
        let source = match self.source {
            None => return Err(BenchError::config("no matrix source (use --gap, --tall or --load)")),
            Some(SourceSpec::Gap { rows, cols, gap }) => {
                MatrixSource::Gap(GapMatrixSpec::new(rows, cols, gap, matrix_seed)?)
            }
            Some(SourceSpec::Tall { rows, cols }) => {
                MatrixSource::Tall(TallMatrixSpec::new(rows, cols, matrix_seed)?)
            }
            Some(SourceSpec::Load(p)) => MatrixSource::File(p),
        };
        let mut cfg = BenchConfig::new(source);
        cfg.base_seed = seed;
        if let Some(m) = self.methods {
            cfg.methods = m;
        }
        if let Some(b) = self.budgets {
            cfg.budgets = b;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        cfg.out = self.out;
        cfg.wall_time = self.wall_time.unwrap_or(true);
        cfg.flops = self.flops.unwrap_or(false);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| BenchError::config(format!("{key}: cannot parse '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(BenchError::config(format!("{key}: expected true or false, got '{value}'"))),
    }
}

fn fields(value: &str, n: usize, what: &str) -> Result<Vec<String>> {
    let parts: Vec<String> = value
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect();
    if parts.len() != n {
        return Err(BenchError::config(format!("{what}: expected {n} values, got '{value}'")));
    }
    Ok(parts)
}

pub fn parse_gap(value: &str) -> Result<SourceSpec> {
    let f = fields(value, 3, "gap")?;
    Ok(SourceSpec::Gap {
        rows: parse_num("gap rows", &f[0])?,
        cols: parse_num("gap cols", &f[1])?,
        gap: parse_num("gap delta", &f[2])?,
    })
}

pub fn parse_tall(value: &str) -> Result<SourceSpec> {
    let f = fields(value, 2, "tall")?;
    Ok(SourceSpec::Tall {
        rows: parse_num("tall rows", &f[0])?,
        cols: parse_num("tall cols", &f[1])?,
    })
}

pub fn parse_methods(value: &str) -> Result<Vec<Method>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<Method>().map_err(BenchError::from))
        .collect()
}

pub fn parse_budgets(value: &str) -> Result<Vec<u64>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num("budgets", s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_layer_parses_every_key() {
        let text = "\
# desk-scale run
gap = 500 500 0.1
matrix-seed = 9
methods = twinest, adaptive_power
budgets = 10,50,100
trials = 7
seed = 3
workers = 2
out = r.csv
no-walltime = true
flops = yes
";
        let cfg = ConfigLayer::parse(text).unwrap().resolve().unwrap();
        assert_eq!(cfg.source, MatrixSource::Gap(GapMatrixSpec::new(500, 500, 0.1, 9).unwrap()));
        assert_eq!(cfg.methods, vec![Method::TwinEst, Method::AdaptivePower]);
        assert_eq!(cfg.budgets, vec![10, 50, 100]);
        assert_eq!((cfg.trials, cfg.base_seed, cfg.workers), (7, 3, 2));
        assert_eq!(cfg.out, Some(PathBuf::from("r.csv")));
        assert!(!cfg.wall_time && cfg.flops);
    }

    #[test]
    fn later_layer_overrides() {
        let file = ConfigLayer::parse("gap = 50 50 0.2\ntrials = 4\nseed = 1").unwrap();
        let flags = ConfigLayer {
            source: Some(SourceSpec::Tall { rows: 40, cols: 4 }),
            trials: Some(9),
            ..Default::default()
        };
        let cfg = file.merge(flags).resolve().unwrap();
        assert_eq!(cfg.source, MatrixSource::Tall(TallMatrixSpec::new(40, 4, 1).unwrap()));
        assert_eq!((cfg.trials, cfg.base_seed), (9, 1));
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(ConfigLayer::parse("gap = 5 5").is_err());
        assert!(ConfigLayer::parse("colour = blue").is_err());
        assert!(ConfigLayer::parse("methods = power").is_err());
        assert!(ConfigLayer::parse("just words").is_err());
        let no_source = ConfigLayer::parse("trials = 3").unwrap();
        assert!(no_source.resolve().is_err());
        let unsorted = ConfigLayer::parse("tall = 10 2\nbudgets = 50,10").unwrap();
        assert!(unsorted.resolve().unwrap_err().to_string().contains("strictly increasing"));
        let zero = ConfigLayer::parse("tall = 10 2\ntrials = 0").unwrap();
        assert!(zero.resolve().is_err());
        let bad_gap = ConfigLayer::parse("gap = 10 10 1.5").unwrap();
        assert!(bad_gap.resolve().is_err());
    }
}
