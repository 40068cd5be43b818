use epd_core::controller::{
    event_e1, pd_law, reset, step_eb_epd, step_epd, ControllerGains, ControllerPhase,
    ControllerState, EpdConfig,
};
use proptest::prelude::*;

fn config() -> impl Strategy<Value = EpdConfig> {
    (1e-4..0.1f64, 0.1..5.0f64, 0.0..20.0f64)
        .prop_map(|(l0, kp, kd)| EpdConfig::new(ControllerGains::new(l0, kp, kd).unwrap()))
}

fn losses() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..3.0f64, 2..40)
}

fn trace(
    cfg: &EpdConfig,
    losses: &[f64],
    step: fn(&EpdConfig, &ControllerState, f64) -> (ControllerState, f64),
) -> Vec<ControllerState> {
    let mut s = reset(&cfg.gains, losses[0]);
    let mut out = vec![s];
    for &l in &losses[1..] {
        s = step(cfg, &s, l).0;
        out.push(s);
    }
    out
}

proptest! {
    #[test]
    fn rate_stays_positive(cfg in config(), ls in losses()) {
        for s in trace(&cfg, &ls, step_epd).into_iter().chain(trace(&cfg, &ls, step_eb_epd)) {
            prop_assert!(s.lambda > 0.0);
            prop_assert!(s.lambda <= cfg.bounds.max);
        }
    }

    #[test]
    fn exponential_phase_doubles_until_first_non_decrease(cfg in config(), ls in losses()) {
        let states = trace(&cfg, &ls, step_epd);
        let k_star = (1..ls.len()).find(|&k| ls[k] >= ls[k - 1]);
        for k in 1..ls.len() {
            let before = &states[k - 1];
            let after = &states[k];
            match k_star {
                Some(ks) if k >= ks => {
                    prop_assert_eq!(after.phase, ControllerPhase::ProportionalDerivative);
                }
                _ => {
                    prop_assert_eq!(after.phase, ControllerPhase::Exponential);
                    let doubled = 2.0 * before.lambda;
                    if doubled <= cfg.bounds.max {
                        prop_assert_eq!(after.lambda, doubled);
                    }
                }
            }
        }
    }

    #[test]
    fn l0_is_fixed_within_a_batch(cfg in config(), ls in losses()) {
        let states = trace(&cfg, &ls, step_eb_epd);
        prop_assert!(states.iter().all(|s| s.l0 == states[0].l0));
    }

    #[test]
    fn gating_is_a_no_op_when_pd_losses_rise(cfg in config(), head in 1usize..6, ls in prop::collection::vec(0.01..3.0f64, 2..30)) {
        // Decreasing prefix, then a strictly increasing tail.
        let mut trace_losses: Vec<f64> = (0..head).map(|i| 3.0 - 0.1 * i as f64).collect();
        let mut last = *trace_losses.last().unwrap();
        for d in ls {
            last += d;
            trace_losses.push(last);
        }
        let a = trace(&cfg, &trace_losses, step_epd);
        let b = trace(&cfg, &trace_losses, step_eb_epd);
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.lambda.to_bits(), y.lambda.to_bits());
        }
    }

    #[test]
    fn gated_rate_is_constant_over_decreasing_pd_runs(cfg in config(), ls in losses()) {
        let states = trace(&cfg, &ls, step_eb_epd);
        for k in 1..ls.len() {
            let before = &states[k - 1];
            if before.phase == ControllerPhase::ProportionalDerivative && !event_e1(ls[k], ls[k - 1]) {
                prop_assert_eq!(states[k].lambda, before.lambda);
            }
        }
    }

    #[test]
    fn steps_are_pure(cfg in config(), ls in losses()) {
        let a = trace(&cfg, &ls, step_eb_epd);
        let b = trace(&cfg, &ls, step_eb_epd);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn proportional_only_law(l0 in 0.1..3.0f64, prev in 0.0..3.0f64, cur in 0.0..3.0f64, kp in 0.1..5.0f64) {
        let gains = ControllerGains::new(0.01, kp, 0.0).unwrap();
        prop_assert_eq!(pd_law(&gains, l0, prev, cur), kp * cur / l0);
    }
}
