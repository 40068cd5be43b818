//! Cross-product sweeps over algorithm, initial learning rate and seed.
//!
//! A sweep file is an ordinary experiment config plus a `[sweep]` table:
//!
//! ```toml
//! [sweep]
//! algorithms = ["epd", "deb-epd"]
//! lr0 = [0.002, 0.01, 0.05]
//! seeds = [0, 1, 2, 3, 4]
//! workers = 4        # optional, defaults to the base config's `workers`
//! ```
//!
//! The base config's own `algorithm`, `lr0` and `seed` may be omitted. Each
//! cell runs independently in a worker pool.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::config::{Algorithm, ExperimentConfig};
use crate::experiment::{run_and_write, RunFiles};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub algorithms: Vec<Algorithm>,
    pub lr0: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    pub axes: SweepAxes,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg_err = |e: toml::de::Error| Error::Config(e.to_string());
        let mut table: toml::Table = text.parse().map_err(cfg_err)?;
        let axes = table
            .remove("sweep")
            .ok_or_else(|| Error::Config("missing [sweep] table".into()))?;
        let axes: SweepAxes = axes.try_into().map_err(cfg_err)?;
        // Placeholders for the swept fields, overwritten per cell.
        table.entry("algorithm").or_insert("epd".into());
        table.entry("lr0").or_insert(0.01.into());
        table.entry("seed").or_insert(0.into());
        let base: ExperimentConfig = table.try_into().map_err(cfg_err)?;
        let sweep = Self { base, axes };
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut sweep = Self::from_toml_str(&text)?;
        sweep
            .base
            .resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(sweep)
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.axes;
        if a.algorithms.is_empty() || a.lr0.is_empty() || a.seeds.is_empty() {
            return Err(Error::Config(
                "sweep needs at least one algorithm, lr0 and seed".into(),
            ));
        }
        if a.workers == Some(0) {
            return Err(Error::Config("sweep.workers must be positive".into()));
        }
        Ok(())
    }

    pub fn workers(&self) -> usize {
        self.axes.workers.unwrap_or(self.base.workers)
    }

    /// Every cell in algorithm-major, then lr0, then seed order.
    pub fn cells(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &algorithm in &self.axes.algorithms {
            for &lr0 in &self.axes.lr0 {
                for &seed in &self.axes.seeds {
                    let mut c = self.base.clone();
                    c.name = None;
                    c.algorithm = algorithm;
                    c.lr0 = lr0;
                    c.seed = seed;
                    out.push(c);
                }
            }
        }
        out
    }
}

#[derive(Debug)]
pub struct CellOutcome {
    pub name: String,
    pub result: Result<RunFiles>,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub out_dir: PathBuf,
    pub cells: Vec<CellOutcome>,
}

impl SweepOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &CellOutcome> {
        self.cells.iter().filter(|c| c.result.is_err())
    }
}

/// Runs every cell. Cell failures are collected rather than aborting the
/// sweep; an error is returned only if the pool cannot start.
pub fn run_sweep(sweep: &SweepConfig) -> Result<SweepOutcome> {
    sweep.validate()?;
    let cells = sweep.cells();
    for c in &cells {
        c.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep.workers())
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let outcomes = pool.install(|| {
        cells
            .par_iter()
            .map(|c| CellOutcome {
                name: c.run_name(),
                result: run_and_write(c),
            })
            .collect()
    });
    Ok(SweepOutcome {
        out_dir: sweep.base.out_dir.clone(),
        cells: outcomes,
    })
}
