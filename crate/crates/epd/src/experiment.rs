//! One experiment: data, model, schedule, and the resulting epoch log.

use std::fs;
use std::path::{Path, PathBuf};

use epd_core::data::split_batches;
use epd_core::harness::{run_classical, run_event_based, EpochRecord, RunError, ScenarioKind};
use epd_core::nn::{Network, NnError, NnLearner};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::{checkpoint, dataset, records, Error, Result};

/// Independent seed streams drawn from the experiment seed.
const STREAM_SPLIT: u64 = 1;
const STREAM_INIT: u64 = 2;
const STREAM_SHUFFLE: u64 = 3;

pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<EpochRecord>,
    pub network: Network,
}

impl From<RunError<NnError>> for Error {
    fn from(e: RunError<NnError>) -> Self {
        match e {
            RunError::Learner(e) => Error::Nn(e),
            RunError::InvalidConfig(why) => Error::Config(why.to_string()),
        }
    }
}

/// Runs `cfg` to completion. Same config, same records, bit for bit.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let (pool, test) = dataset::load(&cfg.dataset)?;
    let batches = split_batches(
        &pool,
        &cfg.dataset.spec(),
        derive_seed(cfg.seed, STREAM_SPLIT),
    )?;
    let mut init = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_INIT));
    let net = Network::mlp(
        pool.dim(),
        &cfg.model.hidden,
        cfg.dataset.c_classes,
        &mut init,
    )?;
    let mut learner = NnLearner::new(
        net,
        cfg.optimizer(),
        batches,
        test,
        cfg.model.minibatch,
        derive_seed(cfg.seed, STREAM_SHUFFLE),
    )?;
    let schedule = cfg.schedule()?;
    let records = match cfg.algorithm.scenario() {
        ScenarioKind::Classical => run_classical(&mut learner, &schedule)?,
        ScenarioKind::EventBasedCyclic => {
            let gov = cfg.governor_config()?;
            run_event_based(&mut learner, &schedule, Some(&gov))?
        }
    };
    Ok(RunOutput {
        records,
        network: learner.into_network(),
    })
}

/// Files written for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunFiles {
    pub csv: PathBuf,
    pub config: PathBuf,
    pub model: PathBuf,
}

impl RunFiles {
    pub fn new(dir: &Path, name: &str) -> Self {
        Self {
            csv: dir.join(format!("{name}.csv")),
            config: dir.join(format!("{name}.json")),
            model: dir.join(format!("{name}.model.json")),
        }
    }
}

/// Writes the epoch CSV, the config echo and the trained network under
/// `cfg.out_dir`.
pub fn write_run(cfg: &ExperimentConfig, out: &RunOutput) -> Result<RunFiles> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let files = RunFiles::new(&cfg.out_dir, &cfg.run_name());
    let write = |path: &Path, text: String| fs::write(path, text).map_err(|e| Error::io(path, e));
    write(&files.csv, records::to_csv_string(&out.records)?)?;
    write(&files.config, serde_json::to_string_pretty(cfg)? + "\n")?;
    checkpoint::save(&out.network, &files.model)?;
    Ok(files)
}

/// Runs and writes in one go.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<RunFiles> {
    let out = run_experiment(cfg)?;
    write_run(cfg, &out)
}
