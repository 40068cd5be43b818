//! Labelled data in memory: the online-learning dataset shape, a seeded
//! Gaussian-blobs generator and the split into equal training batches.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::nn::Matrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataError {
    InvalidSpec(&'static str),
    InsufficientData { needed: usize, available: usize },
    LabelOutOfRange { label: usize, classes: usize },
    LengthMismatch { features: usize, labels: usize },
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::InvalidSpec(why) => write!(f, "invalid dataset spec: {why}"),
            DataError::InsufficientData { needed, available } => write!(
                f,
                "insufficient data: {needed} training instances needed, {available} available"
            ),
            DataError::LabelOutOfRange { label, classes } => {
                write!(f, "label {label} out of range for {classes} classes")
            }
            DataError::LengthMismatch { features, labels } => {
                write!(f, "{features} feature rows but {labels} labels")
            }
        }
    }
}

impl core::error::Error for DataError {}

/// Sizes of an online-learning experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DatasetSpec {
    /// Training instances available, `T`.
    pub t_train: usize,
    /// Test instances, `V`.
    pub v_test: usize,
    /// Classes, `C`.
    pub c_classes: usize,
    /// Number of data batches, `B`.
    pub b_batches: usize,
    /// Instances per batch, `S`.
    pub s_batch: usize,
    /// Epochs per batch, `N`.
    pub n_epochs: usize,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.t_train == 0
            || self.v_test == 0
            || self.c_classes == 0
            || self.b_batches == 0
            || self.s_batch == 0
            || self.n_epochs == 0
        {
            return Err(DataError::InvalidSpec("all sizes must be positive"));
        }
        let needed = self.b_batches * self.s_batch;
        if needed > self.t_train {
            return Err(DataError::InsufficientData {
                needed,
                available: self.t_train,
            });
        }
        Ok(())
    }

    /// Total epoch budget `B * N`, shared by every scenario.
    pub fn total_epochs(&self) -> usize {
        self.b_batches * self.n_epochs
    }
}

/// Feature rows with integer class labels.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LabeledSet {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl LabeledSet {
    pub fn new(features: Matrix, labels: Vec<usize>, classes: usize) -> Result<Self, DataError> {
        if features.rows() != labels.len() {
            return Err(DataError::LengthMismatch {
                features: features.rows(),
                labels: labels.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(DataError::LabelOutOfRange { label, classes });
        }
        Ok(Self {
            features,
            labels,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }
}

/// Shuffles the training pool with `seed` and cuts `B` disjoint batches of
/// exactly `S` instances. Instances beyond `B * S` are left unused.
pub fn split_batches(
    dataset: &LabeledSet,
    spec: &DatasetSpec,
    seed: u64,
) -> Result<Vec<LabeledSet>, DataError> {
    spec.validate()?;
    let needed = spec.b_batches * spec.s_batch;
    if dataset.len() < needed {
        return Err(DataError::InsufficientData {
            needed,
            available: dataset.len(),
        });
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(order[..needed]
        .chunks_exact(spec.s_batch)
        .map(|idx| dataset.subset(idx))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BlobsConfig {
    pub dim: usize,
    pub classes: usize,
    /// Standard deviation of the class centres around the origin.
    pub center_spread: f64,
    /// Standard deviation of samples around their class centre.
    pub noise: f64,
    pub seed: u64,
}

/// Isotropic Gaussian clusters, one per class.
#[derive(Debug, Clone, PartialEq)]
pub struct Blobs {
    config: BlobsConfig,
    centers: Matrix,
}

impl Blobs {
    /// Draws the class centres from `config.seed`.
    pub fn new(config: BlobsConfig) -> Result<Self, DataError> {
        if config.dim == 0 || config.classes == 0 {
            return Err(DataError::InvalidSpec(
                "blobs need positive dim and classes",
            ));
        }
        if !(config.center_spread >= 0.0 && config.noise >= 0.0) {
            return Err(DataError::InvalidSpec("blob spreads must be nonnegative"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut centers = Matrix::zeros(config.classes, config.dim);
        for c in 0..config.classes {
            for v in centers.row_mut(c) {
                *v = config.center_spread * standard_normal(&mut rng);
            }
        }
        Ok(Self { config, centers })
    }

    pub fn centers(&self) -> &Matrix {
        &self.centers
    }

    /// `n` samples with balanced labels (`i mod C`, then shuffled), drawn
    /// from stream `stream` of the generator seed.
    pub fn sample(&self, n: usize, stream: u64) -> LabeledSet {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(stream + 1);
        let c = self.config.classes;
        let mut labels: Vec<usize> = (0..n).map(|i| i % c).collect();
        labels.shuffle(&mut rng);
        let mut features = Matrix::zeros(n, self.config.dim);
        for (i, &l) in labels.iter().enumerate() {
            let center = self.centers.row(l);
            for (v, &m) in features.row_mut(i).iter_mut().zip(center) {
                *v = m + self.config.noise * standard_normal(&mut rng);
            }
        }
        LabeledSet {
            features,
            labels,
            classes: c,
        }
    }
}

/// Box-Muller draw from N(0, 1).
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // 1 - u lies in (0, 1], keeping the log finite.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}
