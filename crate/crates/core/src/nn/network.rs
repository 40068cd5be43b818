use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::loss::PROB_EPS;
use super::{Matrix, NnError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Activation {
    Relu,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LayerShape {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
}

impl LayerShape {
    /// Weights (`outputs x inputs`, row-major) followed by biases.
    pub fn param_count(&self) -> usize {
        self.outputs * (self.inputs + 1)
    }
}

/// Dense network; hidden layers use ReLU and the last layer is softmax.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Network {
    layers: Vec<LayerShape>,
    theta: Vec<f64>,
}

/// Result of a forward/backward pass over a mini-batch.
#[derive(Debug, Clone)]
pub struct Backprop {
    /// Softmax outputs, one row per sample.
    pub probs: Matrix,
    /// Mean categorical cross-entropy.
    pub loss: f64,
    /// Gradient of `loss` with respect to `theta`.
    pub grad: Vec<f64>,
}

impl Network {
    pub fn new(layers: Vec<LayerShape>, theta: Vec<f64>) -> Result<Self, NnError> {
        Self::check_layers(&layers)?;
        let n: usize = layers.iter().map(LayerShape::param_count).sum();
        if theta.len() != n {
            return Err(NnError::ShapeMismatch {
                expected: n,
                found: theta.len(),
            });
        }
        Ok(Self { layers, theta })
    }

    fn check_layers(layers: &[LayerShape]) -> Result<(), NnError> {
        let (last, hidden) = layers
            .split_last()
            .ok_or(NnError::InvalidArchitecture("no layers"))?;
        if last.activation != Activation::Softmax {
            return Err(NnError::InvalidArchitecture("last layer must be softmax"));
        }
        if hidden.iter().any(|l| l.activation != Activation::Relu) {
            return Err(NnError::InvalidArchitecture("hidden layers must be relu"));
        }
        if layers.iter().any(|l| l.inputs == 0 || l.outputs == 0) {
            return Err(NnError::InvalidArchitecture("zero-width layer"));
        }
        if layers.windows(2).any(|w| w[0].outputs != w[1].inputs) {
            return Err(NnError::InvalidArchitecture("layer shapes do not chain"));
        }
        Ok(())
    }

    /// `inputs -> hidden[0] -> ... -> classes` with weights drawn uniformly
    /// from `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` and zero biases.
    pub fn mlp<R: Rng + ?Sized>(
        inputs: usize,
        hidden: &[usize],
        classes: usize,
        rng: &mut R,
    ) -> Result<Self, NnError> {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut fan_in = inputs;
        for &h in hidden {
            layers.push(LayerShape {
                inputs: fan_in,
                outputs: h,
                activation: Activation::Relu,
            });
            fan_in = h;
        }
        layers.push(LayerShape {
            inputs: fan_in,
            outputs: classes,
            activation: Activation::Softmax,
        });
        Self::check_layers(&layers)?;

        let mut theta = Vec::with_capacity(layers.iter().map(LayerShape::param_count).sum());
        for l in &layers {
            let bound = 1.0 / libm::sqrt(l.inputs as f64);
            theta.extend((0..l.inputs * l.outputs).map(|_| rng.gen_range(-bound..=bound)));
            theta.extend(core::iter::repeat_n(0.0, l.outputs));
        }
        Ok(Self { layers, theta })
    }

    pub fn layers(&self) -> &[LayerShape] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn check_input(&self, inputs: &Matrix) -> Result<(), NnError> {
        if inputs.cols() != self.input_dim() {
            return Err(NnError::ShapeMismatch {
                expected: self.input_dim(),
                found: inputs.cols(),
            });
        }
        Ok(())
    }

    /// Row-stochastic output matrix, one row per input row.
    pub fn forward(&self, inputs: &Matrix) -> Result<Matrix, NnError> {
        self.check_input(inputs)?;
        let mut out = Matrix::zeros(inputs.rows(), self.output_dim());
        let mut acts = self.scratch();
        for (i, x) in inputs.iter_rows().enumerate() {
            self.forward_sample(x, &mut acts);
            out.row_mut(i).copy_from_slice(&acts[self.layers.len()]);
        }
        Ok(out)
    }

    fn scratch(&self) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(vec![0.0; self.input_dim()]);
        acts.extend(self.layers.iter().map(|l| vec![0.0; l.outputs]));
        acts
    }

    /// Fills `acts[0]` with `x` and `acts[i + 1]` with the output of layer `i`.
    fn forward_sample(&self, x: &[f64], acts: &mut [Vec<f64>]) {
        acts[0].copy_from_slice(x);
        let mut offset = 0;
        for (li, layer) in self.layers.iter().enumerate() {
            let (w, rest) = self.theta[offset..].split_at(layer.inputs * layer.outputs);
            let b = &rest[..layer.outputs];
            offset += layer.param_count();

            let (before, after) = acts.split_at_mut(li + 1);
            let input = &before[li];
            let out = &mut after[0];
            for (j, o) in out.iter_mut().enumerate() {
                let row = &w[j * layer.inputs..(j + 1) * layer.inputs];
                *o = b[j] + row.iter().zip(input).map(|(a, c)| a * c).sum::<f64>();
            }
            match layer.activation {
                Activation::Relu => out.iter_mut().for_each(|v| *v = v.max(0.0)),
                Activation::Softmax => softmax_in_place(out),
            }
        }
    }

    /// Forward and backward pass over a mini-batch with integer labels.
    pub fn backprop(&self, inputs: &Matrix, labels: &[usize]) -> Result<Backprop, NnError> {
        self.check_input(inputs)?;
        if inputs.rows() == 0 {
            return Err(NnError::EmptyBatch);
        }
        if labels.len() != inputs.rows() {
            return Err(NnError::ShapeMismatch {
                expected: inputs.rows(),
                found: labels.len(),
            });
        }
        let classes = self.output_dim();
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(NnError::InvalidLabel { label, classes });
        }

        let n = inputs.rows() as f64;
        let mut grad = vec![0.0; self.theta.len()];
        let mut probs = Matrix::zeros(inputs.rows(), classes);
        let mut acts = self.scratch();
        let mut deltas: Vec<Vec<f64>> = self.layers.iter().map(|l| vec![0.0; l.outputs]).collect();
        let offsets: Vec<usize> = self
            .layers
            .iter()
            .scan(0, |acc, l| {
                let o = *acc;
                *acc += l.param_count();
                Some(o)
            })
            .collect();
        let mut loss = 0.0;

        for (i, (x, &label)) in inputs.iter_rows().zip(labels).enumerate() {
            self.forward_sample(x, &mut acts);
            let out = &acts[self.layers.len()];
            probs.row_mut(i).copy_from_slice(out);
            loss -= libm::log(out[label].max(PROB_EPS));

            // softmax + categorical cross-entropy: dL/dz = (p - y) / n
            let last = self.layers.len() - 1;
            for (d, &p) in deltas[last].iter_mut().zip(out.iter()) {
                *d = p / n;
            }
            deltas[last][label] -= 1.0 / n;

            for li in (0..self.layers.len()).rev() {
                let layer = self.layers[li];
                let off = offsets[li];
                let input = &acts[li];
                let (w_grad, b_grad) =
                    grad[off..off + layer.param_count()].split_at_mut(layer.inputs * layer.outputs);
                let delta = &deltas[li];
                for (j, &dj) in delta.iter().enumerate() {
                    if dj == 0.0 {
                        continue;
                    }
                    b_grad[j] += dj;
                    for (g, &a) in w_grad[j * layer.inputs..(j + 1) * layer.inputs]
                        .iter_mut()
                        .zip(input)
                    {
                        *g += dj * a;
                    }
                }
                if li == 0 {
                    break;
                }
                let w = &self.theta[off..off + layer.inputs * layer.outputs];
                let (lower, upper) = deltas.split_at_mut(li);
                let delta = &upper[0];
                let prev = &mut lower[li - 1];
                for (c, pd) in prev.iter_mut().enumerate() {
                    // ReLU derivative taken as 0 at 0.
                    *pd = if input[c] > 0.0 {
                        delta
                            .iter()
                            .enumerate()
                            .map(|(j, &dj)| dj * w[j * layer.inputs + c])
                            .sum()
                    } else {
                        0.0
                    };
                }
            }
        }

        Ok(Backprop {
            probs,
            loss: loss / n,
            grad,
        })
    }
}

pub(crate) fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = libm::exp(*v - max);
        sum += *v;
    }
    z.iter_mut().for_each(|v| *v /= sum);
}
