//! Evaluation metrics over an epoch log.

use alloc::vec::Vec;
use core::fmt;

use crate::harness::EpochRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricsError {
    EmptyRun,
    TooFewEpochs { needed: usize, found: usize },
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::EmptyRun => f.write_str("run has no epochs"),
            MetricsError::TooFewEpochs { needed, found } => {
                write!(f, "need at least {needed} epochs, run has {found}")
            }
        }
    }
}

impl core::error::Error for MetricsError {}

/// Minimum run length for [`fasd`].
pub const FASD_MIN_EPOCHS: usize = 10;

/// `(final validation loss, final validation accuracy)` from the last record.
pub fn final_metrics(records: &[EpochRecord]) -> Result<(f64, f64), MetricsError> {
    records
        .last()
        .map(|r| (r.val_loss, r.val_accuracy))
        .ok_or(MetricsError::EmptyRun)
}

/// Number of trailing epochs used by [`fasd`]: `ceil(0.1 * total)`.
pub fn tail_len(total: usize) -> usize {
    total.div_ceil(10)
}

/// Population standard deviation of `values`.
pub fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    libm::sqrt(var)
}

/// Final accuracy standard deviation: population std of validation accuracy
/// over the last `ceil(10%)` of epochs.
pub fn fasd(records: &[EpochRecord]) -> Result<f64, MetricsError> {
    if records.len() < FASD_MIN_EPOCHS {
        return Err(MetricsError::TooFewEpochs {
            needed: FASD_MIN_EPOCHS,
            found: records.len(),
        });
    }
    let tail: Vec<f64> = records[records.len() - tail_len(records.len())..]
        .iter()
        .map(|r| r.val_accuracy)
        .collect();
    Ok(population_std(&tail))
}

/// Earliest 1-based global epoch whose validation accuracy reaches
/// `threshold`, if any.
pub fn first_epoch_to(records: &[EpochRecord], threshold: f64) -> Option<u32> {
    records
        .iter()
        .find(|r| r.val_accuracy >= threshold)
        .map(|r| r.global_epoch)
}

/// The convergence threshold used across a set of experiments: 95% of the
/// best final accuracy among them.
pub fn convergence_threshold(final_accuracies: impl IntoIterator<Item = f64>) -> Option<f64> {
    final_accuracies
        .into_iter()
        .fold(None, |best: Option<f64>, a| {
            Some(best.map_or(a, |b| b.max(a)))
        })
        .map(|best| 0.95 * best)
}

/// The record at which the last batch is exited for the first time, i.e. the
/// end of the first full pass over `b_batches` batches.
pub fn first_round_end(records: &[EpochRecord], b_batches: usize) -> Option<&EpochRecord> {
    records
        .iter()
        .find(|r| r.batch_id as usize == b_batches && r.batch_switch)
}

/// Per-run numbers that feed the report tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub total_epochs: usize,
    pub final_loss: f64,
    pub fva: f64,
    pub fasd: Option<f64>,
    /// `(epoch, loss, accuracy)` at the end of the first round.
    pub first_round: Option<(u32, f64, f64)>,
}

impl RunSummary {
    pub fn from_records(records: &[EpochRecord], b_batches: usize) -> Result<Self, MetricsError> {
        let (final_loss, fva) = final_metrics(records)?;
        Ok(Self {
            total_epochs: records.len(),
            final_loss,
            fva,
            fasd: fasd(records).ok(),
            first_round: first_round_end(records, b_batches)
                .map(|r| (r.global_epoch, r.val_loss, r.val_accuracy)),
        })
    }
}
