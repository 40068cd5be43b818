//! Learning-rate control for online training.
//!
//! The crate is `no_std` (it needs `alloc`) and contains everything that is
//! pure computation:
//!
//! - [`controller`]: the E/PD learning-rate law and its event-gated variant.
//! - [`governor`]: slope-triggered batch switching over a rolling loss window.
//! - [`nn`]: a dense softmax network, losses, accuracy and optimizers.
//! - [`data`]: in-memory labelled sets, a seeded Gaussian-blobs generator and
//!   batch splitting.
//! - [`harness`]: classical and cyclic event-based online-learning loops.
//! - [`metrics`]: final loss/accuracy, tail accuracy deviation and
//!   first-epoch-to-threshold.
//!
//! File formats, configuration and the command line live in the `epd` crate.
#![no_std]

extern crate alloc;

pub mod controller;
pub mod data;
pub mod governor;
pub mod harness;
pub mod metrics;
pub mod nn;

pub use controller::{
    event_e1, pd_law, reset, step_eb_epd, step_epd, ControllerGains, ControllerPhase,
    ControllerState, EpdConfig, LrBounds,
};
pub use data::{split_batches, Blobs, BlobsConfig, DataError, DatasetSpec, LabeledSet};
pub use governor::{fit_slope, BatchDecision, GovernorConfig, GovernorState, SlopeFit};
pub use harness::{
    run_classical, run_event_based, EpochRecord, Evaluation, Learner, LossSignal, LrPolicy,
    RunError, ScenarioKind, Schedule,
};
pub use nn::{Matrix, Network, NnError, NnLearner, OptimizerKind};
