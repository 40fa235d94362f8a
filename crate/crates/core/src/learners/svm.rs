//! Linear soft-margin SVM, one-vs-rest, trained by Pegasos-style
//! stochastic sub-gradient descent.
//!
//! Each binary problem minimizes
//! `(lambda/2)·(||w||² + b²) + (1/n)·sum max(0, 1 - y_i (w·x_i + b))`
//! with `lambda = 1 / (C n)` and step size `1 / (lambda t)`. The bias is
//! handled as an extra weight on a constant input of 1.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{self, derive_seed, stream};
use crate::{Error, Matrix, Result, N_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    #[default]
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    pub epochs: usize,
    pub kernel: Kernel,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            epochs: 50,
            kernel: Kernel::Linear,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Learner("svm: C must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Learner("svm: epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Trains one binary problem. `y` holds +1 / -1.
///
/// The returned hyperplane is the average of the iterates visited during the
/// final epoch.
pub fn svm_binary_train(x: &Matrix, y: &[f64], c: f64, epochs: usize, seed: u64) -> Result<(Vec<f64>, f64)> {
    if x.rows() != y.len() {
        return Err(Error::Learner(format!("svm: {} rows but {} labels", x.rows(), y.len())));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::Learner("svm: labels must be +1 or -1".into()));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::Learner("svm: both classes must be present".into()));
    }
    if !(c > 0.0 && c.is_finite()) || epochs == 0 {
        return Err(Error::Learner("svm: C must be positive and epochs at least 1".into()));
    }
    let n = x.rows();
    let d = x.cols();
    let lambda = 1.0 / (c * n as f64);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut w_avg = vec![0.0; d];
    let mut b_avg = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng::seeded(seed);
    let mut t = 0u64;
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        let last = epoch + 1 == epochs;
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = x.row(i);
            let margin = y[i] * (row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + b);
            let shrink = 1.0 - 1.0 / t as f64;
            w.iter_mut().for_each(|v| *v *= shrink);
            b *= shrink;
            if margin < 1.0 {
                let step = eta * y[i];
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj += step * xj;
                }
                b += step;
            }
            if last {
                for (a, v) in w_avg.iter_mut().zip(&w) {
                    *a += v;
                }
                b_avg += b;
            }
        }
    }
    let inv = 1.0 / n as f64;
    w_avg.iter_mut().for_each(|v| *v *= inv);
    b_avg *= inv;
    if !(w_avg.iter().all(|v| v.is_finite()) && b_avg.is_finite()) {
        return Err(Error::Learner("svm: training diverged".into()));
    }
    Ok((w_avg, b_avg))
}

/// Four one-vs-rest hyperplanes. Scores are raw margins `w_k·x + b_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub config: SvmConfig,
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

/// Seed of the one-vs-rest problem for `class`.
pub fn ovr_seed(seed: u64, class: usize) -> u64 {
    derive_seed(derive_seed(seed, stream::SVM), class as u64)
}

impl LinearSvm {
    pub fn fit(config: &SvmConfig, x: &Matrix, y: &[usize], seed: u64) -> Result<Self> {
        config.validate()?;
        super::require_two_classes("svm", x, y)?;
        let d = x.cols();
        let fitted = (0..N_CLASSES)
            .into_par_iter()
            .map(|class| {
                let yb: Vec<f64> = y.iter().map(|&c| if c == class { 1.0 } else { -1.0 }).collect();
                if !yb.contains(&1.0) {
                    // Class absent from training: never predicted.
                    return Ok((vec![0.0; d], -1.0));
                }
                svm_binary_train(x, &yb, config.c, config.epochs, ovr_seed(seed, class))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut weights = Matrix::zeros(N_CLASSES, d);
        let mut biases = Vec::with_capacity(N_CLASSES);
        for (c, (w, b)) in fitted.into_iter().enumerate() {
            weights.row_mut(c).copy_from_slice(&w);
            biases.push(b);
        }
        Ok(LinearSvm {
            config: *config,
            weights,
            biases,
        })
    }

    pub fn n_features(&self) -> usize {
        self.weights.cols()
    }

    pub fn predict_scores_row(&self, row: &[f64]) -> [f64; N_CLASSES] {
        std::array::from_fn(|c| self.biases[c] + self.weights.row(c).iter().zip(row).map(|(a, b)| a * b).sum::<f64>())
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.weights.rows() != N_CLASSES || self.biases.len() != N_CLASSES {
            return Err(Error::Learner("svm: expected 4 one-vs-rest hyperplanes".into()));
        }
        if !self.weights.as_slice().iter().chain(&self.biases).all(|v| v.is_finite()) {
            return Err(Error::Learner("svm: non-finite weights".into()));
        }
        Ok(())
    }
}
