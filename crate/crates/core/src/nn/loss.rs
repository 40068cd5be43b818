//! Loss and accuracy over a batch of predictions.

use alloc::vec::Vec;

use super::{Matrix, NnError};

/// Probabilities are clipped to `[PROB_EPS, 1 - PROB_EPS]` before logs.
pub const PROB_EPS: f64 = 1e-12;

/// Predicted probability rows paired with one-hot ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionBatch {
    y_hat: Matrix,
    y: Matrix,
}

impl PredictionBatch {
    /// `y` must have the same shape as `y_hat` and one-hot rows.
    pub fn new(y_hat: Matrix, y: Matrix) -> Result<Self, NnError> {
        if y.rows() != y_hat.rows() || y.cols() != y_hat.cols() {
            return Err(NnError::ShapeMismatch {
                expected: y_hat.rows() * y_hat.cols(),
                found: y.rows() * y.cols(),
            });
        }
        for (i, row) in y.iter_rows().enumerate() {
            let ones = row.iter().filter(|&&v| v == 1.0).count();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            if ones != 1 || ones + zeros != row.len() {
                return Err(NnError::NotOneHot { row: i });
            }
        }
        Ok(Self { y_hat, y })
    }

    pub fn from_labels(y_hat: Matrix, labels: &[usize]) -> Result<Self, NnError> {
        if labels.len() != y_hat.rows() {
            return Err(NnError::ShapeMismatch {
                expected: y_hat.rows(),
                found: labels.len(),
            });
        }
        let classes = y_hat.cols();
        let mut y = Matrix::zeros(y_hat.rows(), classes);
        for (i, &l) in labels.iter().enumerate() {
            if l >= classes {
                return Err(NnError::InvalidLabel { label: l, classes });
            }
            y.row_mut(i)[l] = 1.0;
        }
        Ok(Self { y_hat, y })
    }

    pub fn y_hat(&self) -> &Matrix {
        &self.y_hat
    }

    pub fn y(&self) -> &Matrix {
        &self.y
    }

    pub fn labels(&self) -> Vec<usize> {
        self.y.iter_rows().map(argmax).collect()
    }
}

/// Class-wise binary cross-entropy averaged over samples:
///
/// `L = -(1/V) sum_p sum_q [y log(p) + (1 - y) log(1 - p)]`.
///
/// For a one-hot target this is larger than categorical cross-entropy; it is
/// the loss reported to controllers and in logs.
pub fn cross_entropy(pred: &PredictionBatch) -> f64 {
    let v = pred.y_hat.rows();
    if v == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for (p_row, y_row) in pred.y_hat.iter_rows().zip(pred.y.iter_rows()) {
        for (&p, &y) in p_row.iter().zip(y_row) {
            let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
            total += y * libm::log(p) + (1.0 - y) * libm::log(1.0 - p);
        }
    }
    -total / v as f64
}

/// `-(1/V) sum_p log p_{p, label}`, the loss whose gradient drives training.
pub fn categorical_cross_entropy(y_hat: &Matrix, labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let total: f64 = y_hat
        .iter_rows()
        .zip(labels)
        .map(|(row, &l)| -libm::log(row[l].max(PROB_EPS)))
        .sum();
    total / labels.len() as f64
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Fraction of rows whose predicted argmax matches the ground-truth class.
pub fn accuracy(pred: &PredictionBatch) -> f64 {
    let v = pred.y_hat.rows();
    if v == 0 {
        return 0.0;
    }
    let correct = pred
        .y_hat
        .iter_rows()
        .zip(pred.y.iter_rows())
        .filter(|(p, y)| argmax(p) == argmax(y))
        .count();
    correct as f64 / v as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(rows: &[&[f64]], labels: &[usize]) -> PredictionBatch {
        PredictionBatch::from_labels(Matrix::from_rows(rows).unwrap(), labels).unwrap()
    }

    #[test]
    fn perfect_prediction_has_near_zero_loss() {
        let b = batch(&[&[1.0 - PROB_EPS, PROB_EPS]], &[0]);
        assert!(cross_entropy(&b) < 1e-10);
    }

    #[test]
    fn uniform_two_class_loss() {
        // -(ln 0.5 + ln 0.5) by hand
        let b = batch(&[&[0.5, 0.5]], &[0]);
        assert!((cross_entropy(&b) - 2.0 * core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn loss_is_a_mean_over_samples() {
        let one = batch(&[&[0.7, 0.3]], &[1]);
        let two = batch(&[&[0.7, 0.3], &[0.7, 0.3]], &[1, 1]);
        assert!((cross_entropy(&one) - cross_entropy(&two)).abs() < 1e-15);
    }

    #[test]
    fn accuracy_counts_argmax_matches() {
        assert_eq!(accuracy(&batch(&[&[0.9, 0.1], &[0.2, 0.8]], &[0, 1])), 1.0);
        assert_eq!(accuracy(&batch(&[&[0.4, 0.6]], &[0])), 0.0);
        let b = batch(
            &[&[0.9, 0.1], &[0.2, 0.8], &[0.6, 0.4], &[0.3, 0.7]],
            &[0, 1, 0, 0],
        );
        assert_eq!(accuracy(&b), 0.75);
    }

    #[test]
    fn ties_resolve_to_lowest_class() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(accuracy(&batch(&[&[0.5, 0.5]], &[0])), 1.0);
        assert_eq!(accuracy(&batch(&[&[0.5, 0.5]], &[1])), 0.0);
    }

    #[test]
    fn one_hot_is_enforced() {
        let y_hat = Matrix::from_rows(&[&[0.5, 0.5]]).unwrap();
        let bad = Matrix::from_rows(&[&[1.0, 1.0]]).unwrap();
        assert!(PredictionBatch::new(y_hat.clone(), bad).is_err());
        let good = Matrix::from_rows(&[&[0.0, 1.0]]).unwrap();
        assert_eq!(PredictionBatch::new(y_hat, good).unwrap().labels(), [1]);
    }

    #[test]
    fn categorical_form() {
        let y_hat = Matrix::from_rows(&[&[0.25, 0.75]]).unwrap();
        let l = categorical_cross_entropy(&y_hat, &[1]);
        assert!((l + libm::log(0.75)).abs() < 1e-15);
    }
}
