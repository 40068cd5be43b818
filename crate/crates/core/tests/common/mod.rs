#![allow(dead_code)]

use epd_core::nn::{categorical_cross_entropy, Matrix, Network};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Central-difference gradient of the training loss, one parameter at a time.
pub fn central_difference(net: &Network, x: &Matrix, labels: &[usize], h: f64) -> Vec<f64> {
    let mut probe = net.clone();
    (0..net.theta().len())
        .map(|i| {
            let orig = probe.theta()[i];
            probe.theta_mut()[i] = orig + h;
            let up = categorical_cross_entropy(&probe.forward(x).unwrap(), labels);
            probe.theta_mut()[i] = orig - h;
            let down = categorical_cross_entropy(&probe.forward(x).unwrap(), labels);
            probe.theta_mut()[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `|a - n| / max(|a|, |n|, floor)`. The floor keeps components that are
/// zero up to rounding from dominating.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// A random small MLP with a random mini-batch.
pub fn random_problem(seed: u64) -> (Network, Matrix, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = rng.gen_range(2..6);
    let hidden: Vec<usize> = (0..rng.gen_range(1..3))
        .map(|_| rng.gen_range(3..8))
        .collect();
    let classes = rng.gen_range(2..5);
    let mut net = Network::mlp(inputs, &hidden, classes, &mut rng).unwrap();
    // Nonzero biases too: with zero biases a row whose hidden units are all
    // off lands exactly on the next layer's ReLU kink, where finite
    // differences are meaningless.
    for w in net.theta_mut() {
        *w = rng.gen_range(-1.0..1.0);
    }
    let rows = rng.gen_range(3..9);
    let x: Vec<f64> = (0..rows * inputs)
        .map(|_| rng.gen_range(-2.0..2.0))
        .collect();
    let labels = (0..rows).map(|_| rng.gen_range(0..classes)).collect();
    (net, Matrix::from_vec(rows, inputs, x).unwrap(), labels)
}

/// Least squares by coarse-to-fine grid search over (alpha, beta), no
/// closed form involved.
pub fn brute_force_line(xs: &[i64], ys: &[f64]) -> (f64, f64) {
    let sse = |a: f64, b: f64| -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let r = y - a * x as f64 - b;
                r * r
            })
            .sum()
    };
    let (mut ca, mut cb) = (0.0, 0.0);
    let (mut ra, mut rb) = (16.0, 64.0);
    while ra > 1e-10 {
        let mut best = (f64::INFINITY, ca, cb);
        for i in -20..=20 {
            for j in -20..=20 {
                let a = ca + ra * i as f64 / 20.0;
                let b = cb + rb * j as f64 / 20.0;
                let e = sse(a, b);
                if e < best.0 {
                    best = (e, a, b);
                }
            }
        }
        ca = best.1;
        cb = best.2;
        ra /= 2.0;
        rb /= 2.0;
    }
    (ca, cb)
}
