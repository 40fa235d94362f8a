//! Multinomial logistic regression trained by gradient descent.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::softmax_into;
use crate::preprocess::one_hot;
use crate::rng::{self, derive_seed, stream};
use crate::{Error, Matrix, Result, N_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "size")]
pub enum BatchMode {
    Full,
    Minibatch(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_lambda: f64,
    pub batch_mode: BatchMode,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            learning_rate: 0.1,
            epochs: 300,
            l2_lambda: 1e-4,
            batch_mode: BatchMode::Full,
        }
    }
}

impl LogisticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Learner("lr: learning_rate must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Learner("lr: epochs must be at least 1".into()));
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::Learner("lr: l2_lambda must be non-negative".into()));
        }
        if self.batch_mode == BatchMode::Minibatch(0) {
            return Err(Error::Learner("lr: minibatch size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Softmax regression: `p = softmax(W x + b)` with `W` of shape `4 x d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

/// Mean cross-entropy plus `(lambda/2)·||W||²`, and its gradient.
///
/// `targets` is `m x 4` (one-hot rows). The bias is not penalized.
pub fn loss_and_gradient(
    weights: &Matrix,
    biases: &[f64],
    x: &Matrix,
    targets: &Matrix,
    l2_lambda: f64,
) -> Result<(f64, Gradients)> {
    let k = weights.rows();
    let d = weights.cols();
    x.check_cols(d)?;
    targets.check_cols(k)?;
    if targets.rows() != x.rows() || biases.len() != k {
        return Err(Error::Learner("lr: inconsistent shapes".into()));
    }
    let m = x.rows();
    let mut gw = Matrix::zeros(k, d);
    let mut gb = vec![0.0; k];
    let mut loss = 0.0;
    let mut z = vec![0.0; k];
    let mut p = vec![0.0; k];
    for i in 0..m {
        let row = x.row(i);
        for (c, zc) in z.iter_mut().enumerate() {
            *zc = biases[c] + dot(weights.row(c), row);
        }
        softmax_into(&z, &mut p);
        let t = targets.row(i);
        for c in 0..k {
            if t[c] != 0.0 {
                loss -= t[c] * p[c].max(f64::MIN_POSITIVE).ln();
            }
            let r = p[c] - t[c];
            gb[c] += r;
            for (g, v) in gw.row_mut(c).iter_mut().zip(row) {
                *g += r * v;
            }
        }
    }
    let inv = if m > 0 { 1.0 / m as f64 } else { 0.0 };
    loss *= inv;
    gb.iter_mut().for_each(|g| *g *= inv);
    let mut sq = 0.0;
    for c in 0..k {
        for (g, w) in gw.row_mut(c).iter_mut().zip(weights.row(c)) {
            *g = *g * inv + l2_lambda * w;
            sq += w * w;
        }
    }
    loss += 0.5 * l2_lambda * sq;
    Ok((loss, Gradients { weights: gw, biases: gb }))
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn one_hot_matrix(y: &[usize]) -> Result<Matrix> {
    let mut t = Matrix::zeros(y.len(), N_CLASSES);
    for (i, &c) in y.iter().enumerate() {
        t.row_mut(i).copy_from_slice(&one_hot(c)?);
    }
    Ok(t)
}

impl LogisticModel {
    pub fn zeros(n_features: usize) -> Self {
        LogisticModel {
            weights: Matrix::zeros(N_CLASSES, n_features),
            biases: vec![0.0; N_CLASSES],
        }
    }

    pub fn fit(config: &LogisticConfig, x: &Matrix, y: &[usize], seed: u64) -> Result<Self> {
        Self::fit_with_history(config, x, y, seed).map(|(m, _)| m)
    }

    /// Trains and returns the full-data objective before each epoch's update
    /// and after the last one (`epochs + 1` values).
    pub fn fit_with_history(
        config: &LogisticConfig,
        x: &Matrix,
        y: &[usize],
        seed: u64,
    ) -> Result<(Self, Vec<f64>)> {
        config.validate()?;
        super::require_two_classes("lr", x, y)?;
        let targets = one_hot_matrix(y)?;
        let mut model = Self::zeros(x.cols());
        let mut history = Vec::with_capacity(config.epochs + 1);
        let mut order: Vec<usize> = (0..x.rows()).collect();
        let mut rng = rng::seeded(derive_seed(seed, stream::MINIBATCH));
        for _ in 0..config.epochs {
            match config.batch_mode {
                BatchMode::Full => {
                    let (loss, g) = loss_and_gradient(&model.weights, &model.biases, x, &targets, config.l2_lambda)?;
                    history.push(loss);
                    model.step(&g, config.learning_rate);
                }
                BatchMode::Minibatch(size) => {
                    history.push(model.loss(x, &targets, config.l2_lambda)?);
                    order.shuffle(&mut rng);
                    for chunk in order.chunks(size) {
                        let xb = x.select_rows(chunk);
                        let tb = targets.select_rows(chunk);
                        let (_, g) = loss_and_gradient(&model.weights, &model.biases, &xb, &tb, config.l2_lambda)?;
                        model.step(&g, config.learning_rate);
                    }
                }
            }
            if !model.is_finite() {
                return Err(Error::Learner("lr: training diverged (non-finite weights)".into()));
            }
        }
        history.push(model.loss(x, &targets, config.l2_lambda)?);
        Ok((model, history))
    }

    fn loss(&self, x: &Matrix, targets: &Matrix, l2: f64) -> Result<f64> {
        loss_and_gradient(&self.weights, &self.biases, x, targets, l2).map(|(l, _)| l)
    }

    fn step(&mut self, g: &Gradients, lr: f64) {
        for c in 0..self.weights.rows() {
            for (w, gw) in self.weights.row_mut(c).iter_mut().zip(g.weights.row(c)) {
                *w -= lr * gw;
            }
        }
        for (b, gb) in self.biases.iter_mut().zip(&g.biases) {
            *b -= lr * gb;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.as_slice().iter().chain(&self.biases).all(|v| v.is_finite())
    }

    pub fn n_features(&self) -> usize {
        self.weights.cols()
    }

    pub fn logits_row(&self, row: &[f64]) -> [f64; N_CLASSES] {
        std::array::from_fn(|c| self.biases[c] + dot(self.weights.row(c), row))
    }

    pub fn predict_scores_row(&self, row: &[f64]) -> [f64; N_CLASSES] {
        let mut p = [0.0; N_CLASSES];
        softmax_into(&self.logits_row(row), &mut p);
        p
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.weights.rows() != N_CLASSES || self.biases.len() != N_CLASSES {
            return Err(Error::Learner("lr: weight shape must be 4 x d".into()));
        }
        if !self.is_finite() {
            return Err(Error::Learner("lr: non-finite weights".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_loss_is_ln4() {
        let x = Matrix::from_vec(4, 2, vec![1., 2., -1., 0.5, 3., 3., 0., -2.]).unwrap();
        let t = one_hot_matrix(&[0, 1, 2, 3]).unwrap();
        let w = Matrix::zeros(4, 2);
        let (loss, _) = loss_and_gradient(&w, &[0.0; 4], &x, &t, 0.0).unwrap();
        assert!((loss - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn confident_prediction_leaves_only_penalty() {
        let x = Matrix::from_vec(1, 1, vec![1.0]).unwrap();
        let t = one_hot_matrix(&[2]).unwrap();
        let mut w = Matrix::zeros(4, 1);
        w.set(2, 0, 1.0);
        let b = [0.0, 0.0, 200.0, 0.0];
        let (loss, _) = loss_and_gradient(&w, &b, &x, &t, 0.5).unwrap();
        assert!((loss - 0.25).abs() < 1e-12);
    }

    #[test]
    fn separable_toy_set_is_learned() {
        // 20 points on the x axis; class 0 left of the origin, class 1 right.
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            let v = 0.5 + i as f64 * 0.5;
            rows.push([-v, (i % 3) as f64 - 1.0]);
            y.push(0);
            rows.push([v, (i % 4) as f64 - 1.5]);
            y.push(1);
        }
        assert!(rows.iter().zip(&y).all(|(r, &c)| (r[0] > 0.0) == (c == 1)));
        let x = Matrix::from_rows(&rows, 2).unwrap();
        let m = LogisticModel::fit(&LogisticConfig::default(), &x, &y, 0).unwrap();
        let correct = (0..x.rows())
            .filter(|&i| super::super::argmax(&m.predict_scores_row(x.row(i))) == y[i])
            .count();
        assert_eq!(correct, 20);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = Matrix::from_vec(3, 1, vec![1., 2., 3.]).unwrap();
        assert!(LogisticModel::fit(&LogisticConfig::default(), &x, &[1, 1, 1], 0).is_err());
    }

    #[test]
    fn minibatch_mode_trains() {
        let x = Matrix::from_vec(6, 1, vec![-3., -2., -1., 1., 2., 3.]).unwrap();
        let y = [0, 0, 0, 3, 3, 3];
        let cfg = LogisticConfig {
            batch_mode: BatchMode::Minibatch(2),
            epochs: 50,
            ..LogisticConfig::default()
        };
        let (m, hist) = LogisticModel::fit_with_history(&cfg, &x, &y, 5).unwrap();
        assert_eq!(hist.len(), 51);
        assert!(hist.last().unwrap() < &hist[0]);
        let again = LogisticModel::fit(&cfg, &x, &y, 5).unwrap();
        assert_eq!(m, again);
    }
}
