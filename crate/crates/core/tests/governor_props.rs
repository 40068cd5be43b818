mod common;

use common::brute_force_line;
use epd_core::governor::{fit_slope, BatchDecision, GovernorConfig, GovernorState};
use proptest::prelude::*;

#[test]
fn closed_form_matches_grid_search_on_noisy_window() {
    let xs = [0, 1, 2, 3];
    let ys = [1.0, 0.8, 0.9, 0.7];
    let fit = fit_slope(&xs, &ys).unwrap();
    let (a, b) = brute_force_line(&xs, &ys);
    assert!((fit.alpha - a).abs() < 1e-6 && (fit.beta - b).abs() < 1e-6);
    // By hand: sxy = -0.4, sxx = 5, so alpha = -0.08 and beta = 0.97.
    assert!((fit.alpha + 0.08).abs() < 1e-12);
    assert!((fit.beta - 0.97).abs() < 1e-12);
}

fn window() -> impl Strategy<Value = (Vec<i64>, Vec<f64>)> {
    (2usize..=10, 0i64..20).prop_flat_map(|(n, start)| {
        (
            Just((start..start + n as i64).collect::<Vec<_>>()),
            prop::collection::vec(0.0..2.0f64, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fit_matches_brute_force((xs, ys) in window()) {
        let fit = fit_slope(&xs, &ys).unwrap();
        let (a, b) = brute_force_line(&xs, &ys);
        prop_assert!((fit.alpha - a).abs() < 1e-6, "{} vs {}", fit.alpha, a);
        prop_assert!((fit.beta - b).abs() < 1e-6, "{} vs {}", fit.beta, b);
    }
}

proptest! {
    #[test]
    fn slope_is_shift_invariant((xs, ys) in window(), shift in 0i64..100) {
        let shifted: Vec<i64> = xs.iter().map(|x| x + shift).collect();
        let a = fit_slope(&xs, &ys).unwrap().alpha;
        let b = fit_slope(&shifted, &ys).unwrap().alpha;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn threshold_monotonicity(alpha in -1.0..1.0f64, t in -1.0..0.0f64, d in 0.0..1.0f64) {
        // A switch at threshold t implies a switch at any lower threshold.
        if alpha > t {
            prop_assert!(alpha > t - d);
        }
    }

    #[test]
    fn steep_linear_descent_never_switches_early(m in 1usize..8, slope in 0.002..0.05f64, extra in 1usize..20) {
        let n_max = m + 1 + extra;
        let cfg = GovernorConfig::new(m, -0.001, n_max).unwrap();
        let mut g = GovernorState::new();
        for k in 0..n_max as u32 {
            let d = g.observe(&cfg, k, 1.0 - slope * k as f64).decision;
            let expect = if k as usize == n_max - 1 { BatchDecision::CallNewBatch } else { BatchDecision::RemainOnBatch };
            prop_assert_eq!(d, expect);
        }
    }

    #[test]
    fn replay_reproduces_decisions(ls in prop::collection::vec(0.0..2.0f64, 1..60), m in 1usize..6) {
        let cfg = GovernorConfig::new(m, -0.001, 30).unwrap();
        let run = || {
            let mut g = GovernorState::new();
            let mut k = 0u32;
            ls.iter()
                .map(|&l| {
                    let d = g.observe(&cfg, k, l).decision;
                    k = if d == BatchDecision::CallNewBatch { 0 } else { k + 1 };
                    d
                })
                .collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn no_batch_exceeds_budget(ls in prop::collection::vec(0.0..2.0f64, 1..200), m in 1usize..6, extra in 1usize..10) {
        let cfg = GovernorConfig::new(m, -0.001, m + extra).unwrap();
        let mut g = GovernorState::new();
        let mut k = 0u32;
        for &l in &ls {
            prop_assert!((k as usize) < cfg.n_max);
            prop_assert!(g.len() <= m + 1);
            if g.observe(&cfg, k, l).decision == BatchDecision::CallNewBatch {
                k = 0;
            } else {
                k += 1;
            }
        }
    }
}
