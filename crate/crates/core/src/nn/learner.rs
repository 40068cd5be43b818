use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::loss::{accuracy, cross_entropy, PredictionBatch};
use super::{Network, NnError, Optimizer, OptimizerKind};
use crate::data::LabeledSet;
use crate::harness::{Evaluation, Learner};

/// A [`Network`] trained by mini-batch gradient descent on in-memory batches.
///
/// Each epoch visits the current batch in a fresh seeded order. The reported
/// training loss is the class-wise binary cross-entropy of the outputs seen
/// during the epoch (before each mini-batch update), averaged over samples.
/// Optimizer moments are zeroed whenever a batch is loaded.
#[derive(Debug, Clone)]
pub struct NnLearner {
    net: Network,
    optimizer: Optimizer,
    batches: Vec<LabeledSet>,
    test: LabeledSet,
    minibatch: usize,
    rng: ChaCha8Rng,
    current: usize,
}

impl NnLearner {
    pub fn new(
        net: Network,
        optimizer: OptimizerKind,
        batches: Vec<LabeledSet>,
        test: LabeledSet,
        minibatch: usize,
        seed: u64,
    ) -> Result<Self, NnError> {
        if minibatch == 0 {
            return Err(NnError::EmptyBatch);
        }
        for set in batches.iter().chain(core::iter::once(&test)) {
            if set.dim() != net.input_dim() {
                return Err(NnError::ShapeMismatch {
                    expected: net.input_dim(),
                    found: set.dim(),
                });
            }
            if set.classes != net.output_dim() {
                return Err(NnError::ShapeMismatch {
                    expected: net.output_dim(),
                    found: set.classes,
                });
            }
            if set.is_empty() {
                return Err(NnError::EmptyBatch);
            }
        }
        let optimizer = Optimizer::new(optimizer, net.theta().len());
        Ok(Self {
            net,
            optimizer,
            batches,
            test,
            minibatch,
            rng: ChaCha8Rng::seed_from_u64(seed),
            current: 0,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn into_network(self) -> Network {
        self.net
    }
}

impl Learner for NnLearner {
    type Error = NnError;

    fn batch_count(&self) -> usize {
        self.batches.len()
    }

    fn load_batch(&mut self, batch: usize) -> Result<(), NnError> {
        if batch >= self.batches.len() {
            return Err(NnError::ShapeMismatch {
                expected: self.batches.len(),
                found: batch,
            });
        }
        self.current = batch;
        self.optimizer.reset();
        Ok(())
    }

    fn train_epoch(&mut self, lr: f64) -> Result<f64, NnError> {
        let data = &self.batches[self.current];
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut self.rng);
        let mut total = 0.0;
        for chunk in order.chunks(self.minibatch) {
            let x = data.features.select_rows(chunk);
            let labels: Vec<usize> = chunk.iter().map(|&i| data.labels[i]).collect();
            let bp = self.net.backprop(&x, &labels)?;
            let seen = PredictionBatch::from_labels(bp.probs, &labels)?;
            total += cross_entropy(&seen) * chunk.len() as f64;
            self.optimizer.step(self.net.theta_mut(), &bp.grad, lr)?;
        }
        Ok(total / data.len() as f64)
    }

    fn evaluate(&mut self) -> Result<Evaluation, NnError> {
        let probs = self.net.forward(&self.test.features)?;
        let pred = PredictionBatch::from_labels(probs, &self.test.labels)?;
        Ok(Evaluation {
            loss: cross_entropy(&pred),
            accuracy: accuracy(&pred),
        })
    }
}
