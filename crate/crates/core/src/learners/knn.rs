//! Brute-force k-nearest-neighbour classifier (Euclidean, majority vote).

use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result, N_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 5 }
    }
}

impl KnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Learner("knn: k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Stores the (standardized) training rows verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub x: Matrix,
    pub y: Vec<usize>,
}

impl KnnModel {
    pub fn fit(config: &KnnConfig, x: &Matrix, y: &[usize]) -> Result<Self> {
        config.validate()?;
        if x.rows() != y.len() {
            return Err(Error::Learner(format!("knn: {} rows but {} labels", x.rows(), y.len())));
        }
        if config.k > x.rows() {
            return Err(Error::Learner(format!(
                "knn: k = {} exceeds {} training rows",
                config.k,
                x.rows()
            )));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= N_CLASSES) {
            return Err(Error::Learner(format!("knn: label {bad} out of range")));
        }
        Ok(KnnModel {
            k: config.k,
            x: x.clone(),
            y: y.to_vec(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    /// Indices of the `k` nearest training rows, nearest first.
    /// Equal distances resolve to the lower training index.
    pub fn neighbors(&self, row: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter_rows()
            .enumerate()
            .map(|(i, r)| (sq_dist(r, row), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let k = self.k.min(d.len());
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
            d.truncate(k);
        }
        d.sort_unstable_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    /// Fraction of the k neighbours in each class.
    pub fn predict_scores_row(&self, row: &[f64]) -> [f64; N_CLASSES] {
        let mut votes = [0.0; N_CLASSES];
        let nb = self.neighbors(row);
        for &i in &nb {
            votes[self.y[i]] += 1.0;
        }
        let k = nb.len() as f64;
        votes.map(|v| v / k)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.x.rows() != self.y.len() {
            return Err(Error::Learner("knn: matrix rows and labels differ".into()));
        }
        if self.k == 0 || self.k > self.x.rows() {
            return Err(Error::Learner("knn: k out of range for stored rows".into()));
        }
        if self.y.iter().any(|&c| c >= N_CLASSES) {
            return Err(Error::Learner("knn: stored label out of range".into()));
        }
        Ok(())
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
