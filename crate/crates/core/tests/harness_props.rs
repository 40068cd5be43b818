use epd_core::controller::{ControllerGains, EpdConfig};
use epd_core::data::{split_batches, Blobs, BlobsConfig, DatasetSpec};
use epd_core::governor::GovernorConfig;
use epd_core::harness::{
    run_classical, run_event_based, Evaluation, Learner, LossSignal, LrPolicy, Schedule,
};
use epd_core::nn::{Network, NnLearner, OptimizerKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Replays a fixed loss curve on every visit, indexed by epoch within visit.
struct Curve {
    batches: usize,
    curve: Vec<f64>,
    k: usize,
}

impl Learner for Curve {
    type Error = ();
    fn batch_count(&self) -> usize {
        self.batches
    }
    fn load_batch(&mut self, _: usize) -> Result<(), ()> {
        self.k = 0;
        Ok(())
    }
    fn train_epoch(&mut self, _: f64) -> Result<f64, ()> {
        self.k += 1;
        Ok(self.curve[(self.k - 1) % self.curve.len()])
    }
    fn evaluate(&mut self) -> Result<Evaluation, ()> {
        Ok(Evaluation {
            loss: self.curve[(self.k - 1) % self.curve.len()],
            accuracy: 0.5,
        })
    }
}

fn schedule(n: usize) -> Schedule {
    Schedule {
        n_epochs: n,
        policy: LrPolicy::Epd {
            config: EpdConfig::new(ControllerGains::new(0.01, 1.0, 10.0).unwrap()),
            event_gated: true,
        },
        loss_signal: LossSignal::Validation,
    }
}

proptest! {
    #[test]
    fn budget_is_conserved_and_visits_are_bounded(
        batches in 1usize..6,
        m in 1usize..6,
        extra in 1usize..20,
        curve in prop::collection::vec(0.1..2.0f64, 1..40),
    ) {
        let n = m + extra;
        let gov = GovernorConfig::new(m, -0.001, n).unwrap();
        let mut learner = Curve { batches, curve, k: 0 };
        let recs = run_event_based(&mut learner, &schedule(n), Some(&gov)).unwrap();
        prop_assert_eq!(recs.len(), batches * n);

        let mut remaining = batches * n;
        for r in recs.iter().filter(|r| r.batch_switch) {
            let len = r.epoch_in_batch as usize + 1;
            prop_assert!(len <= n);
            prop_assert!(len >= (m + 1).min(remaining));
            remaining -= len;
        }
        prop_assert_eq!(remaining, 0);
        for (i, r) in recs.iter().enumerate() {
            prop_assert_eq!(r.global_epoch as usize, i + 1);
            prop_assert!(r.lambda > 0.0);
        }
    }

    #[test]
    fn disabled_governor_reduces_to_classical(
        batches in 1usize..5,
        n in 1usize..15,
        curve in prop::collection::vec(0.1..2.0f64, 1..20),
    ) {
        let a = run_classical(&mut Curve { batches, curve: curve.clone(), k: 0 }, &schedule(n)).unwrap();
        let b = run_event_based(&mut Curve { batches, curve, k: 0 }, &schedule(n), None).unwrap();
        prop_assert_eq!(a, b);
    }
}

fn blobs_learner(seed: u64, kind: OptimizerKind) -> NnLearner {
    let spec = DatasetSpec {
        t_train: 600,
        v_test: 200,
        c_classes: 3,
        b_batches: 3,
        s_batch: 200,
        n_epochs: 8,
    };
    let blobs = Blobs::new(BlobsConfig {
        dim: 4,
        classes: 3,
        center_spread: 2.0,
        noise: 1.0,
        seed: 5,
    })
    .unwrap();
    let batches = split_batches(&blobs.sample(spec.t_train, 0), &spec, seed).unwrap();
    let test = blobs.sample(spec.v_test, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = Network::mlp(4, &[16], 3, &mut rng).unwrap();
    NnLearner::new(net, kind, batches, test, 32, seed).unwrap()
}

#[test]
fn nn_runs_are_replayable() {
    let run = |seed| {
        let mut l = blobs_learner(seed, OptimizerKind::SgdExternalLr);
        run_event_based(
            &mut l,
            &schedule(8),
            Some(&GovernorConfig::with_budget(8).unwrap()),
        )
        .unwrap()
    };
    assert_eq!(run(3), run(3));
    assert_ne!(run(3), run(4));
}

#[test]
fn nn_training_learns_blobs() {
    let mut l = blobs_learner(1, OptimizerKind::SgdExternalLr);
    let recs = run_classical(&mut l, &schedule(8)).unwrap();
    assert_eq!(recs.len(), 24);
    assert!(recs.last().unwrap().val_accuracy > recs[0].val_accuracy.min(0.6));
    assert!(recs.last().unwrap().val_accuracy > 0.6);

    let mut l = blobs_learner(1, OptimizerKind::adam());
    let s = Schedule {
        policy: LrPolicy::Constant { lambda0: 0.01 },
        ..schedule(8)
    };
    let recs = run_classical(&mut l, &s).unwrap();
    assert!(recs.last().unwrap().val_accuracy > 0.6);
}
