//! Experiment configuration files.
//!
//! Configs are TOML. Every field except the dataset sizes has a default, and
//! the fully resolved config is echoed as JSON next to each run's results.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use epd_core::controller::{ControllerGains, EpdConfig, LrBounds};
use epd_core::data::DatasetSpec;
use epd_core::governor::GovernorConfig;
use epd_core::harness::{LossSignal, LrPolicy, ScenarioKind, Schedule};
use epd_core::nn::OptimizerKind;
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// E/PD control, classical scenario.
    Epd,
    /// Event-gated E/PD, classical scenario.
    EbEpd,
    /// Event-gated E/PD with slope-triggered batch switching, cyclic scenario.
    DebEpd,
    SgdConst,
    SgdDecay,
    Adam,
    Amsgrad,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Epd,
        Algorithm::EbEpd,
        Algorithm::DebEpd,
        Algorithm::SgdConst,
        Algorithm::SgdDecay,
        Algorithm::Adam,
        Algorithm::Amsgrad,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Epd => "epd",
            Algorithm::EbEpd => "eb-epd",
            Algorithm::DebEpd => "deb-epd",
            Algorithm::SgdConst => "sgd-const",
            Algorithm::SgdDecay => "sgd-decay",
            Algorithm::Adam => "adam",
            Algorithm::Amsgrad => "amsgrad",
        }
    }

    /// Name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::Epd => "E/PD",
            Algorithm::EbEpd => "EB E/PD",
            Algorithm::DebEpd => "D-EB E/PD",
            Algorithm::SgdConst => "SGD",
            Algorithm::SgdDecay => "SGD decay",
            Algorithm::Adam => "Adam",
            Algorithm::Amsgrad => "AMSGrad",
        }
    }

    pub fn scenario(self) -> ScenarioKind {
        match self {
            Algorithm::DebEpd => ScenarioKind::EventBasedCyclic,
            _ => ScenarioKind::Classical,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    /// Seeded Gaussian blobs.
    Blobs,
    /// Flat binary files, see [`crate::dataset`].
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub source: DataSource,
    pub t_train: usize,
    pub v_test: usize,
    pub c_classes: usize,
    pub b_batches: usize,
    pub s_batch: usize,
    pub n_epochs: usize,
    #[serde(default = "defaults::dim")]
    pub dim: usize,
    #[serde(default = "defaults::center_spread")]
    pub center_spread: f64,
    #[serde(default = "defaults::noise")]
    pub noise: f64,
    /// Seed of the blob centres and samples; fixed across run seeds.
    #[serde(default)]
    pub data_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_path: Option<PathBuf>,
}

impl DatasetConfig {
    pub fn spec(&self) -> DatasetSpec {
        DatasetSpec {
            t_train: self.t_train,
            v_test: self.v_test,
            c_classes: self.c_classes,
            b_batches: self.b_batches,
            s_batch: self.s_batch,
            n_epochs: self.n_epochs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "defaults::hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "defaults::minibatch")]
    pub minibatch: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden: defaults::hidden(),
            minibatch: defaults::minibatch(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    #[serde(default = "defaults::kp")]
    pub kp: f64,
    #[serde(default = "defaults::kd")]
    pub kd: f64,
    #[serde(default = "defaults::lr_min")]
    pub lr_min: f64,
    #[serde(default = "defaults::lr_max")]
    pub lr_max: f64,
}

impl Default for GainsConfig {
    fn default() -> Self {
        Self {
            kp: defaults::kp(),
            kd: defaults::kd(),
            lr_min: defaults::lr_min(),
            lr_max: defaults::lr_max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GovernorSettings {
    #[serde(default = "defaults::m")]
    pub m: usize,
    #[serde(default = "defaults::alpha_thld")]
    pub alpha_thld: f64,
}

impl Default for GovernorSettings {
    fn default() -> Self {
        Self {
            m: defaults::m(),
            alpha_thld: defaults::alpha_thld(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    #[serde(default = "defaults::decay_rate")]
    pub rate: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            rate: defaults::decay_rate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    #[serde(default = "defaults::beta1")]
    pub beta1: f64,
    #[serde(default = "defaults::beta2")]
    pub beta2: f64,
    #[serde(default = "defaults::adam_eps")]
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: defaults::beta1(),
            beta2: defaults::beta2(),
            eps: defaults::adam_eps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Output file stem; defaults to `{algorithm}_lr{lr0}_s{seed}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub algorithm: Algorithm,
    pub lr0: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub loss_signal: LossSignal,
    /// Worker threads for sweeps.
    #[serde(default = "defaults::workers")]
    pub workers: usize,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub gains: GainsConfig,
    #[serde(default)]
    pub governor: GovernorSettings,
    #[serde(default)]
    pub decay: DecayConfig,
    #[serde(default)]
    pub adam: AdamConfig,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub algorithm: Option<Algorithm>,
    pub lr0: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, Error> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Makes relative dataset paths relative to the config file's directory.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.dataset.train_path, &mut self.dataset.test_path]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = &o.out_dir {
            self.out_dir = d.clone();
        }
        if let Some(a) = o.algorithm {
            self.algorithm = a;
        }
        if let Some(l) = o.lr0 {
            self.lr0 = l;
        }
    }

    pub fn run_name(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{}_lr{}_s{}", self.algorithm, self.lr0, self.seed))
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.dataset
            .spec()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.dataset.c_classes < 2 {
            return bad("at least two classes are required".into());
        }
        match self.dataset.source {
            DataSource::Blobs => {
                if self.dataset.dim == 0 {
                    return bad("dataset.dim must be positive".into());
                }
            }
            DataSource::Flat => {
                if self.dataset.train_path.is_none() || self.dataset.test_path.is_none() {
                    return bad("flat datasets need train_path and test_path".into());
                }
            }
        }
        if self.model.minibatch == 0 || self.model.hidden.contains(&0) {
            return bad("model sizes must be positive".into());
        }
        if self.workers == 0 {
            return bad("workers must be positive".into());
        }
        self.policy()?;
        if self.algorithm == Algorithm::DebEpd {
            self.governor_config()?;
        }
        if matches!(self.algorithm, Algorithm::Adam | Algorithm::Amsgrad) {
            let a = &self.adam;
            let unit = 0.0..1.0;
            if !(unit.contains(&a.beta1) && unit.contains(&a.beta2) && a.eps > 0.0) {
                return bad("adam.beta1/beta2 must lie in [0, 1) and eps must be positive".into());
            }
        }
        Ok(())
    }

    pub fn policy(&self) -> Result<LrPolicy, Error> {
        let positive = self.lr0 > 0.0 && self.lr0.is_finite();
        if !positive {
            return Err(Error::Config(format!(
                "lr0 must be positive, got {}",
                self.lr0
            )));
        }
        Ok(match self.algorithm {
            Algorithm::Epd | Algorithm::EbEpd | Algorithm::DebEpd => {
                let gains = ControllerGains::new(self.lr0, self.gains.kp, self.gains.kd)
                    .map_err(|e| Error::Config(e.to_string()))?;
                let config = EpdConfig {
                    gains,
                    bounds: LrBounds {
                        min: self.gains.lr_min,
                        max: self.gains.lr_max,
                    },
                };
                config
                    .validate()
                    .map_err(|e| Error::Config(e.to_string()))?;
                LrPolicy::Epd {
                    config,
                    event_gated: self.algorithm != Algorithm::Epd,
                }
            }
            Algorithm::SgdDecay => {
                if !(self.decay.rate >= 0.0 && self.decay.rate.is_finite()) {
                    return Err(Error::Config("decay.rate must be nonnegative".into()));
                }
                LrPolicy::TimeDecay {
                    lambda0: self.lr0,
                    rate: self.decay.rate,
                }
            }
            Algorithm::SgdConst | Algorithm::Adam | Algorithm::Amsgrad => {
                LrPolicy::Constant { lambda0: self.lr0 }
            }
        })
    }

    pub fn optimizer(&self) -> OptimizerKind {
        let a = &self.adam;
        match self.algorithm {
            Algorithm::Adam => OptimizerKind::Adam {
                beta1: a.beta1,
                beta2: a.beta2,
                eps: a.eps,
            },
            Algorithm::Amsgrad => OptimizerKind::AmsGrad {
                beta1: a.beta1,
                beta2: a.beta2,
                eps: a.eps,
            },
            _ => OptimizerKind::SgdExternalLr,
        }
    }

    pub fn governor_config(&self) -> Result<GovernorConfig, Error> {
        GovernorConfig::new(
            self.governor.m,
            self.governor.alpha_thld,
            self.dataset.n_epochs,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn schedule(&self) -> Result<Schedule, Error> {
        Ok(Schedule {
            n_epochs: self.dataset.n_epochs,
            policy: self.policy()?,
            loss_signal: self.loss_signal,
        })
    }
}

mod defaults {
    use std::path::PathBuf;

    pub fn dim() -> usize {
        8
    }
    pub fn center_spread() -> f64 {
        1.0
    }
    pub fn noise() -> f64 {
        1.0
    }
    pub fn hidden() -> Vec<usize> {
        vec![32]
    }
    pub fn minibatch() -> usize {
        32
    }
    pub fn kp() -> f64 {
        1.0
    }
    pub fn kd() -> f64 {
        10.0
    }
    pub fn lr_min() -> f64 {
        1e-8
    }
    pub fn lr_max() -> f64 {
        10.0
    }
    pub fn m() -> usize {
        4
    }
    pub fn alpha_thld() -> f64 {
        -0.001
    }
    pub fn decay_rate() -> f64 {
        0.05
    }
    pub fn beta1() -> f64 {
        0.9
    }
    pub fn beta2() -> f64 {
        0.999
    }
    pub fn adam_eps() -> f64 {
        1e-7
    }
    pub fn out_dir() -> PathBuf {
        PathBuf::from("results")
    }
    pub fn workers() -> usize {
        4
    }
}
