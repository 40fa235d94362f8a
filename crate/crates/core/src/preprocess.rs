//! Label indexing, standardization, and seeded train/test partitioning.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{ActionLabel, Dataset};
use crate::rng::{self, derive_seed, stream};
use crate::{Error, Matrix, Result, N_CLASSES};

pub fn encode_label(name: &str) -> Result<usize> {
    ActionLabel::from_name(name).map(ActionLabel::index)
}

pub fn decode_label(index: usize) -> Result<&'static str> {
    ActionLabel::from_index(index)
        .map(ActionLabel::name)
        .ok_or_else(|| Error::Preprocess(format!("class index {index} out of range")))
}

pub fn one_hot(index: usize) -> Result<[f64; N_CLASSES]> {
    if index >= N_CLASSES {
        return Err(Error::Preprocess(format!("class index {index} out of range")));
    }
    let mut v = [0.0; N_CLASSES];
    v[index] = 1.0;
    Ok(v)
}

/// Per-feature standardization: `(x - mean) / scale`.
///
/// `scale` is the population standard deviation of the fitted column, or 1
/// when that column is constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl ScalerParams {
    pub fn fit(x: &Matrix) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::Preprocess("cannot fit a scaler on zero rows".into()));
        }
        let n = x.rows() as f64;
        let mut means = vec![0.0; x.cols()];
        for row in x.iter_rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        // A constant column keeps its exact value as the mean; the summed
        // mean can be an ulp off and would leave a spurious tiny variance.
        let first = x.row(0);
        let constant: Vec<bool> = (0..x.cols())
            .map(|j| x.iter_rows().all(|r| r[j] == first[j]))
            .collect();
        for (j, m) in means.iter_mut().enumerate() {
            if constant[j] {
                *m = first[j];
            }
        }
        let mut var = vec![0.0; x.cols()];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&means) {
                let d = v - m;
                *s += d * d;
            }
        }
        let scales = var
            .into_iter()
            .zip(&constant)
            .map(|(s, &c)| {
                let sd = (s / n).sqrt();
                if c || sd == 0.0 {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(ScalerParams { means, scales })
    }

    pub fn n_features(&self) -> usize {
        self.means.len()
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        x.check_cols(self.n_features())?;
        let mut out = x.clone();
        for i in 0..out.rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.means).zip(&self.scales) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }

    pub fn inverse_transform(&self, x: &Matrix) -> Result<Matrix> {
        x.check_cols(self.n_features())?;
        let mut out = x.clone();
        for i in 0..out.rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.means).zip(&self.scales) {
                *v = *v * s + m;
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.means.len() != self.scales.len() {
            return Err(Error::Preprocess("scaler means/scales length mismatch".into()));
        }
        if self.scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) || self.means.iter().any(|m| !m.is_finite()) {
            return Err(Error::Preprocess("scaler has non-finite mean or non-positive scale".into()));
        }
        Ok(())
    }
}

/// Where scaler statistics come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingMode {
    /// Fit on the training partition, apply the same parameters to test.
    #[default]
    FitOnTrain,
    /// Compatibility mode: each partition is standardized with its own statistics.
    PerPartition,
}

/// Standardizes a train/test pair. Returns the training scaler and both matrices.
pub fn standardize_pair(train: &Matrix, test: &Matrix, mode: ScalingMode) -> Result<(ScalerParams, Matrix, Matrix)> {
    let scaler = ScalerParams::fit(train)?;
    let xtr = scaler.transform(train)?;
    let xte = match mode {
        ScalingMode::FitOnTrain => scaler.transform(test)?,
        ScalingMode::PerPartition if test.rows() > 0 => ScalerParams::fit(test)?.transform(test)?,
        ScalingMode::PerPartition => test.clone(),
    };
    Ok((scaler, xtr, xte))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            train_fraction,
            seed,
            stratified: false,
        }
    }

    pub fn stratified(mut self, yes: bool) -> Self {
        self.stratified = yes;
        self
    }
}

/// Row indices of a train/test partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn train_count(n: usize, fraction: f64) -> usize {
    (fraction * n as f64).floor() as usize
}

/// Seeded permutation split of `n` rows (`labels` are only consulted when stratifying).
pub fn split_indices(labels: &[usize], spec: &SplitSpec) -> Result<SplitIndices> {
    let n = labels.len();
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Preprocess(format!(
            "train_fraction {} must lie strictly between 0 and 1",
            spec.train_fraction
        )));
    }
    let split = if spec.stratified {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for class in 0..N_CLASSES {
            let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
            idx.shuffle(&mut rng::seeded(derive_seed(spec.seed, class as u64)));
            let k = train_count(idx.len(), spec.train_fraction);
            test.extend_from_slice(&idx[k..]);
            idx.truncate(k);
            train.extend(idx);
        }
        let mut r = rng::seeded(derive_seed(spec.seed, stream::STRATIFY_RESHUFFLE));
        train.shuffle(&mut r);
        test.shuffle(&mut r);
        SplitIndices { train, test }
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng::seeded(spec.seed));
        let k = train_count(n, spec.train_fraction);
        let test = idx.split_off(k);
        SplitIndices { train: idx, test }
    };
    if split.train.is_empty() || split.test.is_empty() {
        return Err(Error::Preprocess(format!(
            "degenerate split of {n} rows at fraction {}: train {} / test {}",
            spec.train_fraction,
            split.train.len(),
            split.test.len()
        )));
    }
    Ok(split)
}

pub fn shuffle_split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let idx = split_indices(ds.labels(), spec)?;
    Ok((ds.subset(&idx.train), ds.subset(&idx.test)))
}

/// Seeded k-fold partition: fold `f` is the test set of the `f`-th pair.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<SplitIndices>> {
    if k < 2 || k > n {
        return Err(Error::Preprocess(format!("cannot make {k} folds from {n} rows")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::seeded(derive_seed(seed, stream::FOLDS)));
    let bounds: Vec<usize> = (0..=k).map(|f| f * n / k).collect();
    Ok((0..k)
        .map(|f| {
            let test = idx[bounds[f]..bounds[f + 1]].to_vec();
            let train = idx[..bounds[f]].iter().chain(&idx[bounds[f + 1]..]).copied().collect();
            SplitIndices { train, test }
        })
        .collect())
}

/// Seeded sample of `m` distinct positions out of `0..n`, in sampled order.
pub fn subsample_indices(n: usize, m: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::seeded(derive_seed(seed, stream::EVAL_SUBSAMPLE)));
    idx.truncate(m.min(n));
    idx
}
