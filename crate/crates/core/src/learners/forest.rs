//! Random forest: bagged Gini trees with per-split feature sampling.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use crate::rng::{self, derive_seed, stream};
use crate::{Error, Matrix, Result, N_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Candidate features per split; `None` means `floor(sqrt(d))`.
    pub mtry: Option<usize>,
    pub bootstrap_size_fraction: f64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            mtry: None,
            bootstrap_size_fraction: 1.0,
        }
    }
}

impl ForestConfig {
    pub fn mtry_for(&self, n_features: usize) -> usize {
        self.mtry
            .unwrap_or_else(|| (n_features as f64).sqrt().floor() as usize)
            .max(1)
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Learner("rf: n_trees must be at least 1".into()));
        }
        let m = self.mtry_for(n_features);
        if m > n_features {
            return Err(Error::Learner(format!("rf: mtry {m} exceeds {n_features} features")));
        }
        if !(self.bootstrap_size_fraction > 0.0 && self.bootstrap_size_fraction.is_finite()) {
            return Err(Error::Learner("rf: bootstrap_size_fraction must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub config: ForestConfig,
    pub seed: u64,
    /// Seed each tree was grown from, in tree order.
    pub tree_seeds: Vec<u64>,
    pub trees: Vec<DecisionTree>,
}

/// Seed of tree `index` in a forest seeded with `seed`.
pub fn tree_seed(seed: u64, index: usize) -> u64 {
    derive_seed(derive_seed(seed, stream::FOREST), index as u64)
}

/// Bootstrap row indices for a tree, drawn with replacement from `0..n`.
pub fn bootstrap_indices(n: usize, fraction: f64, rng: &mut rng::Rng) -> Vec<usize> {
    let size = ((fraction * n as f64).round() as usize).max(1);
    (0..size).map(|_| rng.random_range(0..n)).collect()
}

impl RandomForest {
    pub fn fit(config: &ForestConfig, x: &Matrix, y: &[usize], seed: u64) -> Result<Self> {
        config.validate(x.cols())?;
        if x.rows() == 0 {
            return Err(Error::Learner("rf: empty training set".into()));
        }
        let params = TreeParams {
            max_depth: config.max_depth,
            min_samples_split: config.min_samples_split,
            mtry: Some(config.mtry_for(x.cols())),
        };
        let tree_seeds: Vec<u64> = (0..config.n_trees).map(|t| tree_seed(seed, t)).collect();
        let trees = tree_seeds
            .par_iter()
            .map(|&s| {
                let mut r = rng::seeded(s);
                let samples = bootstrap_indices(x.rows(), config.bootstrap_size_fraction, &mut r);
                DecisionTree::fit_on_samples(x, y, samples, &params, &mut r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RandomForest {
            config: *config,
            seed,
            tree_seeds,
            trees,
        })
    }

    pub fn n_features(&self) -> usize {
        self.trees.first().map_or(0, |t| t.n_features)
    }

    /// Mean of the per-tree leaf class distributions.
    pub fn predict_scores_row(&self, row: &[f64]) -> [f64; N_CLASSES] {
        let mut acc = [0.0; N_CLASSES];
        for t in &self.trees {
            for (a, p) in acc.iter_mut().zip(t.predict_proba_row(row)) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        acc.map(|a| a / n)
    }

    /// Mean decrease in Gini impurity per feature, normalized to sum to 1.
    pub fn feature_importance(&self) -> Vec<f64> {
        let d = self.n_features();
        let mut total = vec![0.0; d];
        for t in &self.trees {
            let imp = t.impurity_importance();
            let s: f64 = imp.iter().sum();
            if s > 0.0 {
                for (a, v) in total.iter_mut().zip(imp) {
                    *a += v / s;
                }
            }
        }
        let s: f64 = total.iter().sum();
        if s > 0.0 {
            total.iter_mut().for_each(|v| *v /= s);
            total
        } else {
            vec![1.0 / d as f64; d]
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.trees.is_empty() || self.trees.len() != self.tree_seeds.len() {
            return Err(Error::Learner("rf: tree list and seed record disagree".into()));
        }
        let d = self.n_features();
        for t in &self.trees {
            if t.n_features != d {
                return Err(Error::Learner("rf: trees disagree on feature count".into()));
            }
            t.validate(self.config.max_depth)?;
        }
        Ok(())
    }
}
