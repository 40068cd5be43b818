//! Dense feedforward networks with a softmax head.
//!
//! Parameters live in one flat vector `theta`; optimizers work on that view
//! directly. Training gradients come from categorical cross-entropy on the
//! softmax output, while the loss reported to controllers is the class-wise
//! binary cross-entropy of [`loss::cross_entropy`].

mod learner;
pub mod loss;
mod matrix;
mod network;
pub mod optim;

use core::fmt;

pub use learner::NnLearner;
pub use loss::{accuracy, categorical_cross_entropy, cross_entropy, PredictionBatch, PROB_EPS};
pub use matrix::Matrix;
pub use network::{Activation, Backprop, LayerShape, Network};
pub use optim::{Optimizer, OptimizerKind};

#[derive(Debug, Clone, PartialEq)]
pub enum NnError {
    ShapeMismatch {
        expected: usize,
        found: usize,
    },
    /// Layer list is empty, does not chain, or does not end in softmax.
    InvalidArchitecture(&'static str),
    InvalidLabel {
        label: usize,
        classes: usize,
    },
    NotOneHot {
        row: usize,
    },
    NonFiniteGradient {
        index: usize,
    },
    EmptyBatch,
    InvalidLearningRate(f64),
}

impl fmt::Display for NnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NnError::ShapeMismatch { expected, found } => {
                write!(f, "shape mismatch: expected {expected}, found {found}")
            }
            NnError::InvalidArchitecture(why) => write!(f, "invalid architecture: {why}"),
            NnError::InvalidLabel { label, classes } => {
                write!(f, "label {label} out of range for {classes} classes")
            }
            NnError::NotOneHot { row } => write!(f, "ground-truth row {row} is not one-hot"),
            NnError::NonFiniteGradient { index } => {
                write!(f, "non-finite gradient at parameter {index}")
            }
            NnError::EmptyBatch => f.write_str("empty mini-batch"),
            NnError::InvalidLearningRate(lr) => {
                write!(f, "learning rate must be positive, got {lr}")
            }
        }
    }
}

impl core::error::Error for NnError {}
