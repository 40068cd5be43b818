//! Parameter update rules.
//!
//! Plain SGD takes its step size from outside (the learning-rate controller).
//! Adam and AMSGrad keep per-parameter moment buffers and use the step size
//! they are given as a fixed `lr`.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum OptimizerKind {
    SgdExternalLr,
    Adam { beta1: f64, beta2: f64, eps: f64 },
    AmsGrad { beta1: f64, beta2: f64, eps: f64 },
}

impl OptimizerKind {
    /// Adam with `beta1 = 0.9`, `beta2 = 0.999`, `eps = 1e-7`.
    pub fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-7,
        }
    }

    /// AMSGrad with the same defaults as [`OptimizerKind::adam`].
    pub fn amsgrad() -> Self {
        OptimizerKind::AmsGrad {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-7,
        }
    }
}

/// An optimizer and its moment buffers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Optimizer {
    kind: OptimizerKind,
    m: Vec<f64>,
    v: Vec<f64>,
    v_max: Vec<f64>,
    t: i32,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, n_params: usize) -> Self {
        let (m, v, v_max) = match kind {
            OptimizerKind::SgdExternalLr => (Vec::new(), Vec::new(), Vec::new()),
            OptimizerKind::Adam { .. } => (vec![0.0; n_params], vec![0.0; n_params], Vec::new()),
            OptimizerKind::AmsGrad { .. } => (
                vec![0.0; n_params],
                vec![0.0; n_params],
                vec![0.0; n_params],
            ),
        };
        Self {
            kind,
            m,
            v,
            v_max,
            t: 0,
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    /// AMSGrad's running elementwise maximum of the second moment.
    pub fn max_second_moment(&self) -> &[f64] {
        &self.v_max
    }

    /// Zeroes the moment buffers and the step counter.
    pub fn reset(&mut self) {
        self.m.iter_mut().for_each(|x| *x = 0.0);
        self.v.iter_mut().for_each(|x| *x = 0.0);
        self.v_max.iter_mut().for_each(|x| *x = 0.0);
        self.t = 0;
    }

    /// Applies one update to `theta`. Fails without touching `theta` when any
    /// gradient component is NaN or infinite.
    pub fn step(&mut self, theta: &mut [f64], grad: &[f64], lr: f64) -> Result<(), NnError> {
        if theta.len() != grad.len() {
            return Err(NnError::ShapeMismatch {
                expected: theta.len(),
                found: grad.len(),
            });
        }
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(NnError::InvalidLearningRate(lr));
        }
        if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
            return Err(NnError::NonFiniteGradient { index });
        }
        match self.kind {
            OptimizerKind::SgdExternalLr => {
                for (w, g) in theta.iter_mut().zip(grad) {
                    *w -= lr * g;
                }
            }
            OptimizerKind::Adam { beta1, beta2, eps } => {
                self.check_buffers(theta.len())?;
                self.t += 1;
                let c1 = 1.0 - libm::pow(beta1, self.t as f64);
                let c2 = 1.0 - libm::pow(beta2, self.t as f64);
                for i in 0..theta.len() {
                    let g = grad[i];
                    self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
                    self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
                    let m_hat = self.m[i] / c1;
                    let v_hat = self.v[i] / c2;
                    theta[i] -= lr * m_hat / (libm::sqrt(v_hat) + eps);
                }
            }
            OptimizerKind::AmsGrad { beta1, beta2, eps } => {
                self.check_buffers(theta.len())?;
                self.t += 1;
                let c1 = 1.0 - libm::pow(beta1, self.t as f64);
                let c2 = 1.0 - libm::pow(beta2, self.t as f64);
                for i in 0..theta.len() {
                    let g = grad[i];
                    self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
                    self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
                    self.v_max[i] = self.v_max[i].max(self.v[i]);
                    let m_hat = self.m[i] / c1;
                    let v_hat = self.v_max[i] / c2;
                    theta[i] -= lr * m_hat / (libm::sqrt(v_hat) + eps);
                }
            }
        }
        Ok(())
    }

    fn check_buffers(&self, n: usize) -> Result<(), NnError> {
        if self.m.len() != n {
            return Err(NnError::ShapeMismatch {
                expected: self.m.len(),
                found: n,
            });
        }
        Ok(())
    }
}
