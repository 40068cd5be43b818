//! Online-learning loops.
//!
//! Training data arrives as `B` batches. Each batch *visit* resets the
//! learning-rate policy, trains epoch by epoch and validates after every
//! epoch. Two scenarios are provided:
//!
//! - [`run_classical`]: each batch once, exactly `N` epochs.
//! - [`run_event_based`]: batches in cyclic order `1..=B, 1, 2, ...`, each
//!   visit ending when the governor calls for a new batch or after `N`
//!   epochs, until `B * N` epochs have been spent in total.
//!
//! Model weights persist across visits; only the policy, the governor window
//! and whatever the [`Learner`] resets in [`Learner::load_batch`] start over.
//!
//! The controller's reference loss `L(0)` is the loss measured after the
//! first epoch of a visit, so epochs 0 and 1 both run at `lambda(0)`.

use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::controller::{self, ControllerPhase, ControllerState, EpdConfig, LOSS_FLOOR};
use crate::governor::{BatchDecision, GovernorConfig, GovernorState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum ScenarioKind {
    Classical,
    EventBasedCyclic,
}

/// Where the per-epoch learning rate comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum LrPolicy {
    /// E/PD control; `event_gated` selects the variant that only recomputes
    /// the PD law when the loss rises.
    Epd {
        config: EpdConfig,
        event_gated: bool,
    },
    /// Fixed rate. Adam and AMSGrad baselines use this as their step size.
    Constant { lambda0: f64 },
    /// `lambda0 / (1 + rate * k)` with `k` the epoch within the visit.
    TimeDecay { lambda0: f64, rate: f64 },
}

impl LrPolicy {
    pub fn lambda0(&self) -> f64 {
        match *self {
            LrPolicy::Epd { config, .. } => config.gains.lambda0,
            LrPolicy::Constant { lambda0 } | LrPolicy::TimeDecay { lambda0, .. } => lambda0,
        }
    }

    fn validate(&self) -> Result<(), &'static str> {
        match *self {
            LrPolicy::Epd { config, .. } => config.validate().map_err(|_| "invalid E/PD gains"),
            LrPolicy::Constant { lambda0 } if lambda0 > 0.0 && lambda0.is_finite() => Ok(()),
            LrPolicy::TimeDecay { lambda0, rate }
                if lambda0 > 0.0 && lambda0.is_finite() && rate >= 0.0 && rate.is_finite() =>
            {
                Ok(())
            }
            _ => Err("learning rate must be positive and finite"),
        }
    }
}

/// Which loss feeds the controller and the governor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LossSignal {
    #[default]
    Validation,
    Training,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Schedule {
    /// Epochs per batch `N`.
    pub n_epochs: usize,
    pub policy: LrPolicy,
    pub loss_signal: LossSignal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
}

/// What the loops need from a model plus its data.
pub trait Learner {
    type Error;

    /// Number of training batches `B`.
    fn batch_count(&self) -> usize;

    /// Makes batch `batch` (0-based) current. Called at the start of every
    /// visit, including revisits.
    fn load_batch(&mut self, batch: usize) -> Result<(), Self::Error>;

    /// One pass over the current batch at rate `lr`; returns the training loss.
    fn train_epoch(&mut self, lr: f64) -> Result<f64, Self::Error>;

    /// Loss and accuracy on the held-out set.
    fn evaluate(&mut self) -> Result<Evaluation, Self::Error>;
}

/// One row of the experiment log.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EpochRecord {
    /// 1-based, strictly increasing over the run.
    pub global_epoch: u32,
    /// 1-based batch number.
    pub batch_id: u32,
    /// 1-based pass over the batches (always 1 in the classical scenario).
    pub round: u32,
    /// 0-based epoch within the visit.
    pub epoch_in_batch: u32,
    /// Learning rate used for this epoch.
    pub lambda: f64,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
    /// The loss signal strictly increased over the previous epoch of the visit.
    pub e1_fired: bool,
    /// This epoch ended its batch visit.
    pub batch_switch: bool,
    /// Controller phase after observing this epoch's loss, for E/PD policies.
    pub phase: Option<ControllerPhase>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunError<E> {
    InvalidConfig(&'static str),
    Learner(E),
}

impl<E: fmt::Display> fmt::Display for RunError<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::InvalidConfig(why) => write!(f, "invalid run configuration: {why}"),
            RunError::Learner(e) => write!(f, "training failed: {e}"),
        }
    }
}

impl<E: fmt::Debug + fmt::Display> core::error::Error for RunError<E> {}

enum PolicyState {
    Epd {
        config: EpdConfig,
        gated: bool,
        state: Option<ControllerState>,
    },
    Constant(f64),
    Decay {
        lambda0: f64,
        rate: f64,
    },
}

impl PolicyState {
    fn start(policy: &LrPolicy) -> Self {
        match *policy {
            LrPolicy::Epd {
                config,
                event_gated,
            } => PolicyState::Epd {
                config,
                gated: event_gated,
                state: None,
            },
            LrPolicy::Constant { lambda0 } => PolicyState::Constant(lambda0),
            LrPolicy::TimeDecay { lambda0, rate } => PolicyState::Decay { lambda0, rate },
        }
    }

    fn lambda(&self, k: u32) -> f64 {
        match self {
            PolicyState::Epd { config, state, .. } => {
                state.map_or(config.gains.lambda0, |s| s.lambda)
            }
            PolicyState::Constant(l) => *l,
            PolicyState::Decay { lambda0, rate } => lambda0 / (1.0 + rate * k as f64),
        }
    }

    fn observe(&mut self, loss: f64) -> Option<ControllerPhase> {
        match self {
            PolicyState::Epd {
                config,
                gated,
                state,
            } => {
                let next = match state {
                    None => controller::reset(&config.gains, loss),
                    Some(s) if *gated => controller::step_eb_epd(config, s, loss).0,
                    Some(s) => controller::step_epd(config, s, loss).0,
                };
                *state = Some(next);
                Some(next.phase)
            }
            _ => None,
        }
    }
}

struct Visit<'a> {
    batch: usize,
    round: u32,
    max_len: usize,
    governor: Option<&'a GovernorConfig>,
}

fn run_visit<L: Learner>(
    learner: &mut L,
    schedule: &Schedule,
    visit: Visit<'_>,
    out: &mut Vec<EpochRecord>,
) -> Result<(), RunError<L::Error>> {
    learner.load_batch(visit.batch).map_err(RunError::Learner)?;
    let mut policy = PolicyState::start(&schedule.policy);
    let mut governor = GovernorState::new();
    let mut l0 = LOSS_FLOOR;
    let mut prev_signal = None;

    for k in 0..visit.max_len as u32 {
        let lambda = policy.lambda(k);
        let train_loss = learner.train_epoch(lambda).map_err(RunError::Learner)?;
        let eval = learner.evaluate().map_err(RunError::Learner)?;
        let signal = match schedule.loss_signal {
            LossSignal::Validation => eval.loss,
            LossSignal::Training => train_loss,
        };
        if k == 0 {
            l0 = signal.max(LOSS_FLOOR);
        }
        let phase = policy.observe(signal);
        let e1 = prev_signal.is_some_and(|p| controller::event_e1(signal, p));
        prev_signal = Some(signal);

        let switch = match visit.governor {
            Some(cfg) => {
                governor.observe(cfg, k, signal / l0).decision == BatchDecision::CallNewBatch
            }
            None => k as usize + 1 >= schedule.n_epochs,
        };
        let last = switch || k as usize + 1 >= visit.max_len;

        out.push(EpochRecord {
            global_epoch: out.len() as u32 + 1,
            batch_id: visit.batch as u32 + 1,
            round: visit.round,
            epoch_in_batch: k,
            lambda,
            train_loss,
            val_loss: eval.loss,
            val_accuracy: eval.accuracy,
            e1_fired: e1,
            batch_switch: last,
            phase,
        });
        if last {
            break;
        }
    }
    Ok(())
}

fn check<L: Learner>(learner: &L, schedule: &Schedule) -> Result<(), RunError<L::Error>> {
    if learner.batch_count() == 0 {
        return Err(RunError::InvalidConfig("no training batches"));
    }
    if schedule.n_epochs == 0 {
        return Err(RunError::InvalidConfig("epochs per batch must be positive"));
    }
    schedule.policy.validate().map_err(RunError::InvalidConfig)
}

/// Every batch once, `N` epochs each: `B * N` records.
pub fn run_classical<L: Learner>(
    learner: &mut L,
    schedule: &Schedule,
) -> Result<Vec<EpochRecord>, RunError<L::Error>> {
    check(learner, schedule)?;
    let b = learner.batch_count();
    let mut out = Vec::with_capacity(b * schedule.n_epochs);
    for batch in 0..b {
        let visit = Visit {
            batch,
            round: 1,
            max_len: schedule.n_epochs,
            governor: None,
        };
        run_visit(learner, schedule, visit, &mut out)?;
    }
    Ok(out)
}

/// Cyclic visits under the total budget `B * N`. With `governor = None` no
/// visit ends early and the epoch counts match [`run_classical`]. A visit
/// that would overrun the budget is cut at the budget.
pub fn run_event_based<L: Learner>(
    learner: &mut L,
    schedule: &Schedule,
    governor: Option<&GovernorConfig>,
) -> Result<Vec<EpochRecord>, RunError<L::Error>> {
    check(learner, schedule)?;
    if let Some(cfg) = governor {
        cfg.validate()
            .map_err(|_| RunError::InvalidConfig("invalid governor settings"))?;
        if cfg.n_max != schedule.n_epochs {
            return Err(RunError::InvalidConfig(
                "governor budget must equal epochs per batch",
            ));
        }
    }
    let b = learner.batch_count();
    let budget = b * schedule.n_epochs;
    let mut out = Vec::with_capacity(budget);
    let mut visit_index = 0usize;
    while out.len() < budget {
        let visit = Visit {
            batch: visit_index % b,
            round: (visit_index / b) as u32 + 1,
            max_len: schedule.n_epochs.min(budget - out.len()),
            governor,
        };
        run_visit(learner, schedule, visit, &mut out)?;
        visit_index += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::ControllerGains;
    use alloc::vec;

    /// Loss depends only on the epoch within the visit.
    struct Scripted {
        batches: usize,
        losses: Vec<f64>,
        k: usize,
        loads: Vec<usize>,
        lrs: Vec<f64>,
    }

    impl Scripted {
        fn new(batches: usize, losses: Vec<f64>) -> Self {
            Self {
                batches,
                losses,
                k: 0,
                loads: Vec::new(),
                lrs: Vec::new(),
            }
        }
    }

    impl Learner for Scripted {
        type Error = ();
        fn batch_count(&self) -> usize {
            self.batches
        }
        fn load_batch(&mut self, batch: usize) -> Result<(), ()> {
            self.loads.push(batch);
            self.k = 0;
            Ok(())
        }
        fn train_epoch(&mut self, lr: f64) -> Result<f64, ()> {
            self.lrs.push(lr);
            self.k += 1;
            Ok(self.losses[(self.k - 1).min(self.losses.len() - 1)])
        }
        fn evaluate(&mut self) -> Result<Evaluation, ()> {
            let loss = self.losses[(self.k - 1).min(self.losses.len() - 1)];
            Ok(Evaluation {
                loss,
                accuracy: 1.0 - loss / 2.0,
            })
        }
    }

    fn epd(gated: bool) -> Schedule {
        Schedule {
            n_epochs: 6,
            policy: LrPolicy::Epd {
                config: EpdConfig::new(ControllerGains::new(0.01, 1.0, 2.0).unwrap()),
                event_gated: gated,
            },
            loss_signal: LossSignal::Validation,
        }
    }

    #[test]
    fn classical_record_count_and_layout() {
        let mut l = Scripted::new(3, vec![1.0, 0.8, 0.6, 0.7, 0.65, 0.62]);
        let recs = run_classical(&mut l, &epd(true)).unwrap();
        assert_eq!(recs.len(), 18);
        assert_eq!(l.loads, [0, 1, 2]);
        for (i, r) in recs.iter().enumerate() {
            assert_eq!(r.global_epoch as usize, i + 1);
            assert_eq!(r.batch_id as usize, i / 6 + 1);
            assert_eq!(r.batch_switch, i % 6 == 5);
        }
    }

    #[test]
    fn lambda_sequence_follows_controller() {
        let mut l = Scripted::new(1, vec![1.0, 0.8, 0.6, 0.7, 0.65, 0.62]);
        let recs = run_classical(&mut l, &epd(true)).unwrap();
        let lambdas: Vec<f64> = recs.iter().map(|r| r.lambda).collect();
        // L(0) = 1.0 is observed after epoch 0, so epoch 1 still uses lambda0.
        let pd = 0.7 - 2.0 * 0.1;
        assert_eq!(lambdas[..4], [0.01, 0.01, 0.02, 0.04]);
        assert!((lambdas[4] - pd).abs() < 1e-12);
        assert_eq!(lambdas[5], lambdas[4]);
        assert_eq!(recs[3].phase, Some(ControllerPhase::ProportionalDerivative));
        assert!(recs[3].e1_fired);
        assert!(!recs[4].e1_fired);
    }

    #[test]
    fn cyclic_without_governor_matches_classical_counts() {
        let losses = vec![1.0, 0.9, 0.95, 0.8, 0.85, 0.7];
        let a = run_classical(&mut Scripted::new(4, losses.clone()), &epd(false)).unwrap();
        let b = run_event_based(&mut Scripted::new(4, losses), &epd(false), None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cyclic_with_governor_revisits_and_conserves_budget() {
        // flat after epoch 0: exits at epoch m = 4 every visit
        let cfg = GovernorConfig::new(4, -0.001, 6).unwrap();
        let mut l = Scripted::new(2, vec![1.0]);
        let recs = run_event_based(&mut l, &epd(true), Some(&cfg)).unwrap();
        assert_eq!(recs.len(), 12);
        assert_eq!(l.loads, [0, 1, 0]);
        let visit_lens: Vec<u32> = recs
            .iter()
            .filter(|r| r.batch_switch)
            .map(|r| r.epoch_in_batch + 1)
            .collect();
        assert_eq!(visit_lens, [5, 5, 2]);
        assert_eq!(recs.last().unwrap().round, 2);
    }

    #[test]
    fn governor_budget_mismatch_is_rejected() {
        let cfg = GovernorConfig::new(4, -0.001, 30).unwrap();
        let r = run_event_based(&mut Scripted::new(2, vec![1.0]), &epd(true), Some(&cfg));
        assert!(matches!(r, Err(RunError::InvalidConfig(_))));
    }

    #[test]
    fn time_decay_resets_per_visit() {
        let s = Schedule {
            n_epochs: 3,
            policy: LrPolicy::TimeDecay {
                lambda0: 0.1,
                rate: 1.0,
            },
            loss_signal: LossSignal::Training,
        };
        let mut l = Scripted::new(2, vec![1.0]);
        run_classical(&mut l, &s).unwrap();
        assert_eq!(l.lrs, [0.1, 0.05, 0.1 / 3.0, 0.1, 0.05, 0.1 / 3.0]);
    }
}
