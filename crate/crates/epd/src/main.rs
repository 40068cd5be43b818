use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use epd::config::{Algorithm, ExperimentConfig, Overrides};
use epd::experiment::run_and_write;
use epd::report::write_report;
use epd::sweep::{run_sweep, SweepConfig};

#[derive(Parser)]
#[command(
    name = "epd",
    version,
    about = "Event-based E/PD learning-rate control experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its epoch CSV, config echo and model.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides `out_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        algo: Option<Algorithm>,
        #[arg(long)]
        lr0: Option<f64>,
    },
    /// Run the algorithm x lr0 x seed cross product, then aggregate.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Aggregate a directory of runs into tables and plot series.
    Report {
        dir: PathBuf,
        /// Where to write the report (defaults to DIR).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            algo,
            lr0,
        } => {
            let mut cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            cfg.apply(&Overrides {
                seed,
                out_dir: out,
                algorithm: algo,
                lr0,
            });
            let files = run_and_write(&cfg)?;
            println!("{}", files.csv.display());
        }
        Command::Sweep {
            config,
            out,
            workers,
        } => {
            let mut sweep = SweepConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(out) = out {
                sweep.base.out_dir = out;
            }
            if workers.is_some() {
                sweep.axes.workers = workers;
            }
            let outcome = run_sweep(&sweep)?;
            let total = outcome.cells.len();
            let mut failed = 0;
            for cell in outcome.failures() {
                failed += 1;
                if let Err(e) = &cell.result {
                    eprintln!("cell {} failed: {e}", cell.name);
                }
            }
            println!(
                "{} of {total} runs written to {}",
                total - failed,
                outcome.out_dir.display()
            );
            if failed > 0 {
                bail!(epd::Error::Sweep { failed, total });
            }
            let (report, _) = write_report(&outcome.out_dir, &outcome.out_dir)?;
            print!("{}", report.to_table());
        }
        Command::Report { dir, out } => {
            let out = out.unwrap_or_else(|| dir.clone());
            let (report, _) = write_report(&dir, &out)?;
            print!("{}", report.to_table());
        }
    }
    Ok(())
}
