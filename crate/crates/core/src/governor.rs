//! Slope-triggered batch switching.
//!
//! After every epoch the governor fits a least-squares line through the last
//! `m + 1` normalized losses of the current batch (epochs `k-m ..= k`). When
//! the slope rises above `alpha_thld` the batch has stopped paying off and
//! the trainer should move on. The per-batch epoch budget `N` forces a switch
//! at the last allowed epoch `k = N - 1` regardless of the fit.
//!
//! No fit is attempted until `m + 1` observations exist in the batch.

use alloc::collections::VecDeque;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GovernorConfig {
    /// Regression window parameter `m`; the window holds `m + 1` points.
    pub m: usize,
    /// Slope threshold; never positive.
    pub alpha_thld: f64,
    /// Maximum epochs per batch `N`.
    pub n_max: usize,
}

impl GovernorConfig {
    pub fn new(m: usize, alpha_thld: f64, n_max: usize) -> Result<Self, GovernorError> {
        let cfg = Self {
            m,
            alpha_thld,
            n_max,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `m = 4`, `alpha_thld = -0.001`.
    pub fn with_budget(n_max: usize) -> Result<Self, GovernorError> {
        Self::new(4, -0.001, n_max)
    }

    pub fn validate(&self) -> Result<(), GovernorError> {
        if self.m == 0 {
            return Err(GovernorError::Window);
        }
        if self.alpha_thld.is_nan() || self.alpha_thld > 0.0 {
            return Err(GovernorError::PositiveThreshold(self.alpha_thld));
        }
        if self.n_max <= self.m {
            return Err(GovernorError::Budget {
                n_max: self.n_max,
                m: self.m,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GovernorError {
    Window,
    PositiveThreshold(f64),
    Budget { n_max: usize, m: usize },
}

impl fmt::Display for GovernorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GovernorError::Window => write!(f, "governor window m must be at least 1"),
            GovernorError::PositiveThreshold(t) => {
                write!(f, "slope threshold must not be positive, got {t}")
            }
            GovernorError::Budget { n_max, m } => {
                write!(f, "epoch budget N={n_max} must exceed window m={m}")
            }
        }
    }
}

impl core::error::Error for GovernorError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitError {
    /// Fewer than two points, zero variance in `xs`, or mismatched lengths.
    DegenerateWindow,
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("degenerate regression window")
    }
}

impl core::error::Error for FitError {}

/// Ordinary least squares line through `(xs[i], ys[i])`.
pub fn fit_slope(xs: &[i64], ys: &[f64]) -> Result<SlopeFit, FitError> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return Err(FitError::DegenerateWindow);
    }
    let nf = n as f64;
    let x_mean = xs.iter().map(|&x| x as f64).sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        return Err(FitError::DegenerateWindow);
    }
    let alpha = sxy / sxx;
    Ok(SlopeFit {
        alpha,
        beta: y_mean - alpha * x_mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum BatchDecision {
    RemainOnBatch,
    CallNewBatch,
}

/// Outcome of one [`GovernorState::observe`] call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub decision: BatchDecision,
    /// Slope of the window, when one was fitted.
    pub slope: Option<f64>,
}

/// Rolling window of `(epoch, normalized loss)` pairs for the current batch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GovernorState {
    window: VecDeque<(u32, f64)>,
    epoch_in_batch: u32,
}

impl GovernorState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn window(&self) -> impl Iterator<Item = &(u32, f64)> {
        self.window.iter()
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn epoch_in_batch(&self) -> u32 {
        self.epoch_in_batch
    }

    pub fn clear(&mut self) {
        self.window.clear();
        self.epoch_in_batch = 0;
    }

    /// Records `normalized_loss = L(k)/L(0)` for within-batch epoch `epoch`
    /// and decides whether to stay on the batch. An epoch index that does not
    /// increase starts a fresh window. The window is emptied whenever the
    /// decision is [`BatchDecision::CallNewBatch`].
    pub fn observe(
        &mut self,
        config: &GovernorConfig,
        epoch: u32,
        normalized_loss: f64,
    ) -> Observation {
        if self.window.back().is_some_and(|&(last, _)| epoch <= last) {
            self.window.clear();
        }
        let cap = config.m + 1;
        while self.window.len() >= cap {
            self.window.pop_front();
        }
        self.window.push_back((epoch, normalized_loss));
        self.epoch_in_batch = epoch;

        let slope = if self.window.len() == cap {
            let xs: alloc::vec::Vec<i64> = self.window.iter().map(|&(e, _)| e as i64).collect();
            let ys: alloc::vec::Vec<f64> = self.window.iter().map(|&(_, l)| l).collect();
            fit_slope(&xs, &ys).ok().map(|f| f.alpha)
        } else {
            None
        };

        let budget_spent = epoch as usize + 1 >= config.n_max;
        let flat = slope.is_some_and(|a| a > config.alpha_thld);
        let decision = if budget_spent || flat {
            self.clear();
            BatchDecision::CallNewBatch
        } else {
            BatchDecision::RemainOnBatch
        };
        Observation { decision, slope }
    }
}
