//! Aggregation over a directory of finished runs.
//!
//! A run is a `<name>.json` config echo next to its `<name>.csv` epoch log.
//! Runs are grouped by `(algorithm, lr0)` and averaged over seeds. The
//! convergence threshold is 95% of the best group-mean final accuracy, and
//! the first epoch to reach it is read off each group's seed-averaged
//! accuracy curve.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use epd_core::harness::{EpochRecord, ScenarioKind};
use epd_core::metrics::{convergence_threshold, RunSummary};
use serde::Serialize;

use crate::config::{Algorithm, ExperimentConfig};
use crate::{records, Error, Result};

pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TXT: &str = "report.txt";
pub const SERIES_DIR: &str = "series";

/// One finished run as found on disk.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub records: Vec<EpochRecord>,
}

/// Loads every run in `dir`. Config echoes without a CSV are an error.
pub fn collect(dir: &Path) -> Result<Vec<RunResult>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut echoes: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.ends_with(".json") && !name.ends_with(".model.json") {
            echoes.push(path);
        }
    }
    echoes.sort();
    let mut runs = Vec::with_capacity(echoes.len());
    for echo in echoes {
        let text = fs::read_to_string(&echo).map_err(|e| Error::io(&echo, e))?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        let csv = echo.with_extension("csv");
        if !csv.exists() {
            return Err(Error::MissingResults(format!(
                "{} has no matching {}",
                echo.display(),
                csv.display()
            )));
        }
        runs.push(RunResult {
            config,
            records: records::load_csv(&csv)?,
        });
    }
    if runs.is_empty() {
        return Err(Error::MissingResults(format!(
            "no runs in {}",
            dir.display()
        )));
    }
    Ok(runs)
}

/// Seed-averaged per-epoch curves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub global_epoch: u32,
    pub lambda: f64,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

/// One table row.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRow {
    pub algorithm: Algorithm,
    pub lr0: f64,
    pub runs: usize,
    pub total_epochs: usize,
    pub final_loss: f64,
    pub fva: f64,
    pub fasd: Option<f64>,
    pub first_epoch: Option<u32>,
    /// Mean end epoch of the first round, over the runs that completed one.
    pub first_round_end: Option<f64>,
    pub first_round_loss: Option<f64>,
    pub first_round_fva: Option<f64>,
    pub series: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub threshold: f64,
    pub rows: Vec<GroupRow>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn mean_series(runs: &[&RunResult]) -> Vec<SeriesPoint> {
    let n = runs.len() as f64;
    (0..runs[0].records.len())
        .map(|i| {
            let avg =
                |f: fn(&EpochRecord) -> f64| runs.iter().map(|r| f(&r.records[i])).sum::<f64>() / n;
            SeriesPoint {
                global_epoch: runs[0].records[i].global_epoch,
                lambda: avg(|r| r.lambda),
                train_loss: avg(|r| r.train_loss),
                val_loss: avg(|r| r.val_loss),
                val_accuracy: avg(|r| r.val_accuracy),
            }
        })
        .collect()
}

/// Groups and averages `runs`. All runs must share one total epoch count.
pub fn aggregate(runs: &[RunResult]) -> Result<Report> {
    let total = runs
        .first()
        .ok_or_else(|| Error::MissingResults("no runs to aggregate".into()))?
        .records
        .len();
    if let Some(bad) = runs.iter().find(|r| r.records.len() != total) {
        return Err(Error::Report(format!(
            "runs have different epoch budgets ({} vs {total} epochs in {}); \
             report them from separate directories",
            bad.records.len(),
            bad.config.run_name()
        )));
    }

    // f64 is not Ord; key on the bit pattern and keep numeric order via the
    // sort below.
    let mut groups: BTreeMap<(Algorithm, u64), Vec<&RunResult>> = BTreeMap::new();
    for r in runs {
        groups
            .entry((r.config.algorithm, r.config.lr0.to_bits()))
            .or_default()
            .push(r);
    }

    let mut rows = Vec::with_capacity(groups.len());
    for ((algorithm, lr_bits), members) in groups {
        let b = members[0].config.dataset.b_batches;
        let summaries: Vec<RunSummary> = members
            .iter()
            .map(|r| RunSummary::from_records(&r.records, b))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Report(e.to_string()))?;
        let fasds: Vec<f64> = summaries.iter().filter_map(|s| s.fasd).collect();
        // Rounds only mean something when batches are revisited.
        let cyclic = algorithm.scenario() == ScenarioKind::EventBasedCyclic;
        let fr: Vec<(u32, f64, f64)> = summaries
            .iter()
            .filter_map(|s| s.first_round)
            .filter(|_| cyclic)
            .collect();
        rows.push(GroupRow {
            algorithm,
            lr0: f64::from_bits(lr_bits),
            runs: members.len(),
            total_epochs: total,
            final_loss: mean(summaries.iter().map(|s| s.final_loss)).unwrap_or(f64::NAN),
            fva: mean(summaries.iter().map(|s| s.fva)).unwrap_or(f64::NAN),
            fasd: (fasds.len() == summaries.len())
                .then(|| mean(fasds))
                .flatten(),
            first_epoch: None,
            first_round_end: mean(fr.iter().map(|f| f.0 as f64)),
            first_round_loss: mean(fr.iter().map(|f| f.1)),
            first_round_fva: mean(fr.iter().map(|f| f.2)),
            series: mean_series(&members),
        });
    }
    rows.sort_by(|a, b| a.algorithm.cmp(&b.algorithm).then(a.lr0.total_cmp(&b.lr0)));

    let threshold = convergence_threshold(rows.iter().map(|r| r.fva)).unwrap_or(0.0);
    for row in &mut rows {
        row.first_epoch = row
            .series
            .iter()
            .find(|p| p.val_accuracy >= threshold)
            .map(|p| p.global_epoch);
    }
    Ok(Report { threshold, rows })
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

fn opt<T>(v: Option<T>, f: impl FnOnce(T) -> String) -> String {
    v.map_or_else(|| "-".to_string(), f)
}

const COLUMNS: [&str; 11] = [
    "algorithm",
    "lr0",
    "runs",
    "total_epochs",
    "final_loss",
    "fva",
    "fasd",
    "first_epoch",
    "first_round_end",
    "first_round_loss",
    "first_round_fva",
];

impl Report {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS)?;
        for r in &self.rows {
            let o = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
            w.write_record([
                r.algorithm.as_str().to_string(),
                r.lr0.to_string(),
                r.runs.to_string(),
                r.total_epochs.to_string(),
                r.final_loss.to_string(),
                r.fva.to_string(),
                o(r.fasd),
                r.first_epoch.map_or(String::new(), |e| e.to_string()),
                o(r.first_round_end),
                o(r.first_round_loss),
                o(r.first_round_fva),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Fixed-width text table. First-round columns appear only when some
    /// group ran the cyclic scenario.
    pub fn to_table(&self) -> String {
        let with_fr = self.rows.iter().any(|r| r.first_round_end.is_some());
        let mut header = vec![
            "Algorithm".to_string(),
            "λ(0)".to_string(),
            "Runs".to_string(),
            "Final loss".to_string(),
            "FVA ±FASD (%)".to_string(),
            format!("1st epoch to {}%", pct(self.threshold)),
        ];
        if with_fr {
            header.extend(["EE of FR", "FL after FR", "FVA after FR (%)"].map(String::from));
        }
        let mut body: Vec<Vec<String>> = Vec::new();
        for r in &self.rows {
            let mut line = vec![
                r.algorithm.display_name().to_string(),
                r.lr0.to_string(),
                r.runs.to_string(),
                format!("{:.4}", r.final_loss),
                format!("{} ±{}", pct(r.fva), opt(r.fasd, pct)),
                opt(r.first_epoch, |e| format!("{e}/{}", r.total_epochs)),
            ];
            if with_fr {
                line.push(opt(r.first_round_end, |e| format!("{e:.1}")));
                line.push(opt(r.first_round_loss, |l| format!("{l:.4}")));
                line.push(opt(r.first_round_fva, pct));
            }
            body.push(line);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                std::iter::once(&header)
                    .chain(&body)
                    .map(|row| row[c].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let mut emit = |row: &[String]| {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, &w)| format!("{cell}{}", " ".repeat(w - cell.chars().count())))
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        };
        emit(&header);
        emit(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>());
        for line in &body {
            emit(line);
        }
        out
    }
}

/// Paths written by [`write_report`].
#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub table: PathBuf,
    pub series: Vec<PathBuf>,
}

/// Aggregates the runs in `results_dir` and writes the tables and plot
/// series into `out_dir`.
pub fn write_report(results_dir: &Path, out_dir: &Path) -> Result<(Report, ReportFiles)> {
    let report = aggregate(&collect(results_dir)?)?;
    let series_dir = out_dir.join(SERIES_DIR);
    fs::create_dir_all(&series_dir).map_err(|e| Error::io(&series_dir, e))?;
    let write = |path: PathBuf, text: String| -> Result<PathBuf> {
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    };
    let csv = write(out_dir.join(REPORT_CSV), report.to_csv()?)?;
    let table = write(out_dir.join(REPORT_TXT), report.to_table())?;
    let mut series = Vec::with_capacity(report.rows.len());
    for row in &report.rows {
        let mut w = csv::Writer::from_writer(Vec::new());
        for p in &row.series {
            w.serialize(p)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
        let name = format!("{}_lr{}.csv", row.algorithm, row.lr0);
        series.push(write(
            series_dir.join(name),
            String::from_utf8(bytes).expect("csv output is utf-8"),
        )?);
    }
    Ok((report, ReportFiles { csv, table, series }))
}
