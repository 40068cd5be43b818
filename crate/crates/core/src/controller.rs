//! E/PD learning-rate control.
//!
//! A batch starts in the exponential phase: the learning rate doubles after
//! every epoch whose loss is strictly below the previous one. The first
//! epoch whose loss does not decrease hands over to a proportional-derivative
//! law on the loss normalized by the batch's first loss `L(0)`:
//!
//! ```text
//! lambda(k+1) = K_P * L(k) / L(0) - K_D * (L(k) - L(k-1)) / L(0)
//! ```
//!
//! The event-gated variant only re-evaluates the PD law when the loss rises
//! (event `e1`); otherwise it holds the current rate.
//!
//! Every function here is pure: the caller owns the [`ControllerState`] and
//! threads it through successive calls.

use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Floor applied to the reference loss `L(0)` so normalization stays finite.
pub const LOSS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ControllerGains {
    /// Initial learning rate `lambda(0)`.
    pub lambda0: f64,
    /// Proportional gain.
    pub kp: f64,
    /// Derivative gain.
    pub kd: f64,
}

impl ControllerGains {
    pub fn new(lambda0: f64, kp: f64, kd: f64) -> Result<Self, GainsError> {
        let gains = Self { lambda0, kp, kd };
        gains.validate()?;
        Ok(gains)
    }

    pub fn validate(&self) -> Result<(), GainsError> {
        if !(self.lambda0 > 0.0 && self.lambda0.is_finite()) {
            return Err(GainsError::Lambda0(self.lambda0));
        }
        if !(self.kp > 0.0 && self.kp.is_finite()) {
            return Err(GainsError::Kp(self.kp));
        }
        if !(self.kd >= 0.0 && self.kd.is_finite()) {
            return Err(GainsError::Kd(self.kd));
        }
        Ok(())
    }
}

impl Default for ControllerGains {
    /// `lambda0 = 0.01`, `K_P = 1`, `K_D = 10`. The gains are placeholders;
    /// tune them per task.
    fn default() -> Self {
        Self {
            lambda0: 0.01,
            kp: 1.0,
            kd: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainsError {
    Lambda0(f64),
    Kp(f64),
    Kd(f64),
    Bounds { min: f64, max: f64 },
}

impl fmt::Display for GainsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GainsError::Lambda0(v) => write!(f, "lambda0 must be positive and finite, got {v}"),
            GainsError::Kp(v) => write!(f, "kp must be positive and finite, got {v}"),
            GainsError::Kd(v) => write!(f, "kd must be nonnegative and finite, got {v}"),
            GainsError::Bounds { min, max } => {
                write!(
                    f,
                    "learning-rate bounds must satisfy 0 < min <= max, got [{min}, {max}]"
                )
            }
        }
    }
}

impl core::error::Error for GainsError {}

/// Clamp range for the controller output. The PD law goes negative when the
/// loss drops steeply enough for the derivative term to dominate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LrBounds {
    pub min: f64,
    pub max: f64,
}

impl LrBounds {
    pub fn validate(&self) -> Result<(), GainsError> {
        if self.min > 0.0 && self.min <= self.max && self.max.is_finite() {
            Ok(())
        } else {
            Err(GainsError::Bounds {
                min: self.min,
                max: self.max,
            })
        }
    }

    /// Clamps `raw` into the range. NaN maps to `min`.
    pub fn clamp(&self, raw: f64) -> f64 {
        if raw.is_nan() {
            self.min
        } else {
            raw.clamp(self.min, self.max)
        }
    }
}

impl Default for LrBounds {
    fn default() -> Self {
        Self {
            min: 1e-8,
            max: 10.0,
        }
    }
}

/// Gains plus output clamp: everything the step functions need besides state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EpdConfig {
    pub gains: ControllerGains,
    #[cfg_attr(feature = "serde", serde(default))]
    pub bounds: LrBounds,
}

impl EpdConfig {
    pub fn new(gains: ControllerGains) -> Self {
        Self {
            gains,
            bounds: LrBounds::default(),
        }
    }

    pub fn validate(&self) -> Result<(), GainsError> {
        self.gains.validate()?;
        self.bounds.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum ControllerPhase {
    #[cfg_attr(feature = "serde", serde(rename = "E"))]
    Exponential,
    #[cfg_attr(feature = "serde", serde(rename = "PD"))]
    ProportionalDerivative,
}

impl ControllerPhase {
    pub fn label(self) -> &'static str {
        match self {
            ControllerPhase::Exponential => "E",
            ControllerPhase::ProportionalDerivative => "PD",
        }
    }
}

/// Controller state for one data batch.
///
/// `lambda` is the rate to use for the next epoch. `l_prev` and `l_curr` are
/// `L(k-1)` and `L(k)`; right after [`reset`] both equal the first loss.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ControllerState {
    pub phase: ControllerPhase,
    pub lambda: f64,
    pub l0: f64,
    pub l_prev: f64,
    pub l_curr: f64,
    pub epoch_in_batch: u32,
}

/// Starts a batch from the loss observed after its first epoch.
pub fn reset(gains: &ControllerGains, first_loss: f64) -> ControllerState {
    let l0 = if first_loss > LOSS_FLOOR {
        first_loss
    } else {
        LOSS_FLOOR
    };
    ControllerState {
        phase: ControllerPhase::Exponential,
        lambda: gains.lambda0,
        l0,
        l_prev: first_loss,
        l_curr: first_loss,
        epoch_in_batch: 0,
    }
}

/// Event `e1`: true iff the loss strictly increased.
#[inline]
pub fn event_e1(l_curr: f64, l_prev: f64) -> bool {
    l_curr - l_prev > 0.0
}

/// Unclamped PD law output.
#[inline]
pub fn pd_law(gains: &ControllerGains, l0: f64, l_prev: f64, l_curr: f64) -> f64 {
    gains.kp * l_curr / l0 - gains.kd * (l_curr - l_prev) / l0
}

fn advance(state: &ControllerState, loss: f64) -> ControllerState {
    ControllerState {
        l_prev: state.l_curr,
        l_curr: loss,
        epoch_in_batch: state.epoch_in_batch + 1,
        ..*state
    }
}

/// One epoch of plain E/PD control. Returns the new state and the rate for
/// the next epoch (also stored in `state.lambda`).
pub fn step_epd(config: &EpdConfig, state: &ControllerState, loss: f64) -> (ControllerState, f64) {
    let mut next = advance(state, loss);
    let raw = match state.phase {
        ControllerPhase::Exponential if loss < state.l_curr => 2.0 * state.lambda,
        _ => {
            next.phase = ControllerPhase::ProportionalDerivative;
            pd_law(&config.gains, state.l0, state.l_curr, loss)
        }
    };
    next.lambda = config.bounds.clamp(raw);
    (next, next.lambda)
}

/// One epoch of event-gated E/PD. Matches [`step_epd`] in the exponential
/// phase and on the transition epoch; afterwards the PD law only runs when
/// [`event_e1`] fires and the rate is held otherwise.
pub fn step_eb_epd(
    config: &EpdConfig,
    state: &ControllerState,
    loss: f64,
) -> (ControllerState, f64) {
    if state.phase == ControllerPhase::ProportionalDerivative && !event_e1(loss, state.l_curr) {
        let next = advance(state, loss);
        return (next, next.lambda);
    }
    step_epd(config, state, loss)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(lambda0: f64, kp: f64, kd: f64) -> EpdConfig {
        EpdConfig::new(ControllerGains::new(lambda0, kp, kd).unwrap())
    }

    fn pd_state(lambda: f64, l0: f64, l_curr: f64) -> ControllerState {
        ControllerState {
            phase: ControllerPhase::ProportionalDerivative,
            lambda,
            l0,
            l_prev: l_curr,
            l_curr,
            epoch_in_batch: 5,
        }
    }

    #[test]
    fn reset_initializes_batch() {
        let s = reset(&cfg(0.01, 1.0, 10.0).gains, 2.3);
        assert_eq!(s.phase, ControllerPhase::Exponential);
        assert_eq!(s.lambda, 0.01);
        assert_eq!(s.l0, 2.3);
        assert_eq!(s.epoch_in_batch, 0);

        let s = reset(&cfg(0.05, 1.0, 10.0).gains, 4.6);
        assert_eq!((s.lambda, s.l0), (0.05, 4.6));
    }

    #[test]
    fn reset_floors_zero_loss() {
        let s = reset(&cfg(0.01, 1.0, 10.0).gains, 0.0);
        assert_eq!(s.l0, LOSS_FLOOR);
    }

    #[test]
    fn exponential_phase_doubles() {
        let c = cfg(0.01, 1.0, 10.0);
        let mut s = reset(&c.gains, 1.0);
        s.l_curr = 1.0;
        let (s, lr) = step_epd(&c, &s, 0.8);
        assert_eq!(lr, 0.02);
        assert_eq!(s.phase, ControllerPhase::Exponential);
    }

    #[test]
    fn transition_uses_pd_law() {
        let c = cfg(0.01, 0.7, 0.3);
        let s = ControllerState {
            phase: ControllerPhase::Exponential,
            lambda: 0.02,
            l0: 1.6,
            l_prev: 1.0,
            l_curr: 0.8,
            epoch_in_batch: 2,
        };
        let (next, lr) = step_epd(&c, &s, 0.9);
        // 0.7 * 0.9 / 1.6 - 0.3 * 0.1 / 1.6, evaluated by hand.
        let expected = 0.39375 - 0.01875;
        assert_eq!(next.phase, ControllerPhase::ProportionalDerivative);
        assert!((lr - expected).abs() < 1e-15, "{lr} vs {expected}");
    }

    #[test]
    fn tie_ends_exponential_phase() {
        let c = cfg(0.01, 1.0, 0.0);
        let s = reset(&c.gains, 1.0);
        let (next, lr) = step_epd(&c, &s, 1.0);
        assert_eq!(next.phase, ControllerPhase::ProportionalDerivative);
        assert_eq!(lr, 1.0);
    }

    #[test]
    fn pd_without_derivative_is_proportional() {
        let c = cfg(0.01, 1.0, 0.0);
        let (_, lr) = step_epd(&c, &pd_state(0.3, 1.0, 0.6), 0.5);
        assert_eq!(lr, 0.5);
    }

    #[test]
    fn e1_is_strict() {
        assert!(event_e1(0.9, 0.8));
        assert!(!event_e1(0.7, 0.8));
        assert!(!event_e1(0.8, 0.8));
    }

    #[test]
    fn eb_holds_on_decrease_and_recomputes_on_increase() {
        let c = cfg(0.01, 1.0, 10.0);
        let (s, lr) = step_eb_epd(&c, &pd_state(0.03, 1.0, 0.6), 0.5);
        assert_eq!(lr, 0.03);
        assert_eq!(s.l_curr, 0.5);

        let (_, lr) = step_eb_epd(&c, &pd_state(0.03, 1.0, 0.6), 0.7);
        let expected = c.bounds.clamp(pd_law(&c.gains, 1.0, 0.6, 0.7));
        assert_eq!(lr, expected);
    }

    #[test]
    fn eb_hand_trace() {
        let lambda0 = 0.01;
        let c = cfg(lambda0, 1.0, 2.0);
        let losses = [1.0, 0.8, 0.6, 0.7, 0.65, 0.62];
        let mut s = reset(&c.gains, losses[0]);
        let mut lambdas = alloc::vec![s.lambda];
        for &l in &losses[1..] {
            let (n, lr) = step_eb_epd(&c, &s, l);
            s = n;
            lambdas.push(lr);
        }
        // 1.0 * 0.7 - 2.0 * (0.7 - 0.6), evaluated by hand.
        let pd = 0.7 - 2.0 * (0.7 - 0.6);
        assert_eq!(lambdas[..3], [lambda0, 2.0 * lambda0, 4.0 * lambda0]);
        assert!((lambdas[3] - pd).abs() < 1e-15);
        assert_eq!(lambdas[4], lambdas[3]);
        assert_eq!(lambdas[5], lambdas[3]);
    }

    #[test]
    fn clamp_keeps_rate_positive() {
        let c = cfg(0.01, 1.0, 100.0);
        // Rise: 1.0 - 100 * 0.5 < 0. Drop: 0.5 + 100 * 0.5 > max.
        let (_, lr) = step_epd(&c, &pd_state(0.1, 1.0, 0.5), 1.0);
        assert_eq!(lr, c.bounds.min);
        let (_, lr) = step_epd(&c, &pd_state(0.1, 1.0, 1.0), 0.5);
        assert_eq!(lr, c.bounds.max);
    }

    #[test]
    fn invalid_gains_are_rejected() {
        assert!(ControllerGains::new(0.0, 1.0, 1.0).is_err());
        assert!(ControllerGains::new(0.1, 0.0, 1.0).is_err());
        assert!(ControllerGains::new(0.1, 1.0, -1.0).is_err());
        assert!(ControllerGains::new(0.1, 1.0, 0.0).is_ok());
    }
}
