//! The four classifiers behind one fit / predict / predict_scores contract.
//!
//! Inputs are standardized feature matrices and class indices in `0..4`.
//! Every learner is a pure function of `(config, data, seed)`: parallel work
//! is split into tasks whose seeds are derived from the run seed and the task
//! index, and results are collected in task order.

pub mod forest;
pub mod knn;
pub mod logistic;
pub mod svm;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use forest::{ForestConfig, RandomForest};
pub use knn::{KnnConfig, KnnModel};
pub use logistic::{loss_and_gradient, BatchMode, LogisticConfig, LogisticModel};
pub use svm::{svm_binary_train, LinearSvm, SvmConfig};
pub use tree::{best_split, gini_impurity, DecisionTree, Split};

use crate::{Error, Matrix, Result, N_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Rf,
    Lr,
    Knn,
    Svm,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 4] = [LearnerKind::Rf, LearnerKind::Lr, LearnerKind::Knn, LearnerKind::Svm];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Rf => "rf",
            LearnerKind::Lr => "lr",
            LearnerKind::Knn => "knn",
            LearnerKind::Svm => "svm",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            LearnerKind::Rf => "Random Forest",
            LearnerKind::Lr => "Logistic Regression",
            LearnerKind::Knn => "K-Nearest Neighbor",
            LearnerKind::Svm => "Support Vector Machine",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}; valid names are rf, lr, knn, svm")))
    }
}

/// Hyperparameters, one variant per learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LearnerConfig {
    Rf(ForestConfig),
    Lr(LogisticConfig),
    Knn(KnnConfig),
    Svm(SvmConfig),
}

impl LearnerConfig {
    pub fn default_for(kind: LearnerKind) -> Self {
        match kind {
            LearnerKind::Rf => LearnerConfig::Rf(ForestConfig::default()),
            LearnerKind::Lr => LearnerConfig::Lr(LogisticConfig::default()),
            LearnerKind::Knn => LearnerConfig::Knn(KnnConfig::default()),
            LearnerKind::Svm => LearnerConfig::Svm(SvmConfig::default()),
        }
    }

    pub fn default_rf() -> Self {
        Self::default_for(LearnerKind::Rf)
    }

    pub fn kind(&self) -> LearnerKind {
        match self {
            LearnerConfig::Rf(_) => LearnerKind::Rf,
            LearnerConfig::Lr(_) => LearnerKind::Lr,
            LearnerConfig::Knn(_) => LearnerKind::Knn,
            LearnerConfig::Svm(_) => LearnerKind::Svm,
        }
    }
}

/// A fitted classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Rf(RandomForest),
    Lr(LogisticModel),
    Knn(KnnModel),
    Svm(LinearSvm),
}

pub fn fit(config: &LearnerConfig, x: &Matrix, y: &[usize], seed: u64) -> Result<Model> {
    if x.rows() == 0 {
        return Err(Error::Learner("empty training set".into()));
    }
    if x.rows() != y.len() {
        return Err(Error::Learner(format!("{} rows but {} labels", x.rows(), y.len())));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= N_CLASSES) {
        return Err(Error::Learner(format!("label {bad} out of range")));
    }
    Ok(match config {
        LearnerConfig::Rf(c) => Model::Rf(RandomForest::fit(c, x, y, seed)?),
        LearnerConfig::Lr(c) => Model::Lr(LogisticModel::fit(c, x, y, seed)?),
        LearnerConfig::Knn(c) => Model::Knn(KnnModel::fit(c, x, y)?),
        LearnerConfig::Svm(c) => Model::Svm(LinearSvm::fit(c, x, y, seed)?),
    })
}

impl Model {
    pub fn kind(&self) -> LearnerKind {
        match self {
            Model::Rf(_) => LearnerKind::Rf,
            Model::Lr(_) => LearnerKind::Lr,
            Model::Knn(_) => LearnerKind::Knn,
            Model::Svm(_) => LearnerKind::Svm,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Rf(m) => m.n_features(),
            Model::Lr(m) => m.n_features(),
            Model::Knn(m) => m.n_features(),
            Model::Svm(m) => m.n_features(),
        }
    }

    pub fn scores_row(&self, row: &[f64]) -> [f64; N_CLASSES] {
        match self {
            Model::Rf(m) => m.predict_scores_row(row),
            Model::Lr(m) => m.predict_scores_row(row),
            Model::Knn(m) => m.predict_scores_row(row),
            Model::Svm(m) => m.predict_scores_row(row),
        }
    }

    /// `m x 4` class scores. Rows are probabilities for rf, lr and knn and
    /// raw one-vs-rest margins for svm.
    pub fn predict_scores(&self, x: &Matrix) -> Result<Matrix> {
        x.check_cols(self.n_features())?;
        let rows: Vec<[f64; N_CLASSES]> = (0..x.rows()).into_par_iter().map(|i| self.scores_row(x.row(i))).collect();
        Matrix::from_rows(&rows, N_CLASSES)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.predict_scores(x)?.iter_rows().map(argmax).collect())
    }

    /// Normalized mean Gini decrease per feature (random forests only).
    pub fn feature_importance(&self) -> Result<Vec<f64>> {
        match self {
            Model::Rf(f) => Ok(f.feature_importance()),
            other => Err(Error::Learner(format!(
                "feature importance is only defined for rf, not {}",
                other.kind()
            ))),
        }
    }

    /// Checks shape and finiteness invariants of the fitted parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Rf(m) => m.validate(),
            Model::Lr(m) => m.validate(),
            Model::Knn(m) => m.validate(),
            Model::Svm(m) => m.validate(),
        }
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Max-shifted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; logits.len()];
    softmax_into(logits, &mut out);
    out
}

pub(crate) fn softmax_into(z: &[f64], out: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &v) in out.iter_mut().zip(z) {
        *o = (v - max).exp();
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o /= sum);
}

fn require_two_classes(name: &str, x: &Matrix, y: &[usize]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::Learner(format!("{name}: {} rows but {} labels", x.rows(), y.len())));
    }
    let present = (0..N_CLASSES).filter(|c| y.contains(c)).count();
    if present < 2 {
        return Err(Error::Learner(format!("{name}: training data needs at least two classes")));
    }
    Ok(())
}
