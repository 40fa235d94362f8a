//! Experiment configuration.
//!
//! Config files are flat `key = value` lines. `#` starts a comment, blank
//! lines are ignored, keys are case-sensitive and a later line overrides an
//! earlier one. Command-line settings are applied after the file with the
//! same keys, so the command line wins.
//!
//! ```text
//! data = log2.csv
//! seed = 42
//! train_fraction = 0.7
//! stratify = false
//! algorithms = rf, lr, knn, svm
//! zero_division = one          # or zero
//! cv_folds = 10                # omit for the 70/30 holdout
//! eval_subsample = 6000        # omit to score the whole test split
//! scaling = fit-on-train       # or per-partition
//! schema = header-mapped       # or strict
//! out_dir = results
//!
//! rf.n_trees = 100
//! rf.max_depth = none
//! rf.min_samples_split = 2
//! rf.mtry = 3
//! rf.bootstrap_size_fraction = 1.0
//! lr.learning_rate = 0.1
//! lr.epochs = 300
//! lr.l2_lambda = 0.0001
//! lr.batch_size = full         # or a positive integer
//! knn.k = 5
//! svm.c = 1.0
//! svm.epochs = 50
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dataset::SchemaPolicy;
use crate::learners::{BatchMode, ForestConfig, KnnConfig, LearnerConfig, LearnerKind, LogisticConfig, SvmConfig};
use crate::metrics::ZeroDivision;
use crate::preprocess::ScalingMode;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data_path: PathBuf,
    pub seed: u64,
    pub train_fraction: f64,
    pub stratified: bool,
    pub algorithms: Vec<LearnerKind>,
    pub forest: ForestConfig,
    pub logistic: LogisticConfig,
    pub knn: KnnConfig,
    pub svm: SvmConfig,
    pub zero_division: ZeroDivision,
    pub cv_folds: Option<usize>,
    pub eval_subsample: Option<usize>,
    pub scaling: ScalingMode,
    pub schema: SchemaPolicy,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data_path: PathBuf::from("log2.csv"),
            seed: 42,
            train_fraction: 0.7,
            stratified: false,
            algorithms: LearnerKind::ALL.to_vec(),
            forest: ForestConfig::default(),
            logistic: LogisticConfig::default(),
            knn: KnnConfig::default(),
            svm: SvmConfig::default(),
            zero_division: ZeroDivision::One,
            cv_folds: None,
            eval_subsample: None,
            scaling: ScalingMode::FitOnTrain,
            schema: SchemaPolicy::HeaderMapped,
            out_dir: PathBuf::from("results"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got {value:?}"))),
    }
}

fn parse_optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    match value {
        "none" | "off" | "" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

/// Reads `key = value` lines into an ordered list.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {raw:?}", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_file(path)?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (k, v) in parse_kv(&text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    /// Applies one setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "data" => self.data_path = PathBuf::from(v),
            "seed" => self.seed = parse(key, v)?,
            "train_fraction" => self.train_fraction = parse(key, v)?,
            "stratify" | "stratified" => self.stratified = parse_bool(key, v)?,
            "algorithms" | "algo" => {
                self.algorithms = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(LearnerKind::from_str)
                    .collect::<Result<_>>()?
            }
            "zero_division" => self.zero_division = v.parse()?,
            "cv_folds" => self.cv_folds = parse_optional(key, v)?,
            "eval_subsample" => self.eval_subsample = parse_optional(key, v)?,
            "scaling" => {
                self.scaling = match v {
                    "fit-on-train" => ScalingMode::FitOnTrain,
                    "per-partition" => ScalingMode::PerPartition,
                    _ => return Err(Error::Config(format!("scaling: expected fit-on-train or per-partition, got {v:?}"))),
                }
            }
            "schema" => {
                self.schema = match v {
                    "strict" => SchemaPolicy::Strict,
                    "header-mapped" => SchemaPolicy::HeaderMapped,
                    _ => return Err(Error::Config(format!("schema: expected strict or header-mapped, got {v:?}"))),
                }
            }
            "out_dir" => self.out_dir = PathBuf::from(v),
            "rf.n_trees" => self.forest.n_trees = parse(key, v)?,
            "rf.max_depth" => self.forest.max_depth = parse_optional(key, v)?,
            "rf.min_samples_split" => self.forest.min_samples_split = parse(key, v)?,
            "rf.mtry" => self.forest.mtry = parse_optional(key, v)?,
            "rf.bootstrap_size_fraction" => self.forest.bootstrap_size_fraction = parse(key, v)?,
            "lr.learning_rate" => self.logistic.learning_rate = parse(key, v)?,
            "lr.epochs" => self.logistic.epochs = parse(key, v)?,
            "lr.l2_lambda" => self.logistic.l2_lambda = parse(key, v)?,
            "lr.batch_size" => {
                self.logistic.batch_mode = match v {
                    "full" => BatchMode::Full,
                    n => BatchMode::Minibatch(parse(key, n)?),
                }
            }
            "knn.k" => self.knn.k = parse(key, v)?,
            "svm.c" => self.svm.c = parse(key, v)?,
            "svm.epochs" => self.svm.epochs = parse(key, v)?,
            _ => return Err(Error::Config(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    pub fn learner_config(&self, kind: LearnerKind) -> LearnerConfig {
        match kind {
            LearnerKind::Rf => LearnerConfig::Rf(self.forest),
            LearnerKind::Lr => LearnerConfig::Lr(self.logistic),
            LearnerKind::Knn => LearnerConfig::Knn(self.knn),
            LearnerKind::Svm => LearnerConfig::Svm(self.svm),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie strictly between 0 and 1, got {}",
                self.train_fraction
            )));
        }
        if let Some(k) = self.cv_folds {
            if k < 2 {
                return Err(Error::Config(format!("cv_folds must be at least 2, got {k}")));
            }
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.eval_subsample == Some(0) {
            return Err(Error::Config("eval_subsample must be positive".into()));
        }
        Ok(())
    }

    /// Settings in file syntax, for recording next to experiment outputs.
    pub fn to_kv(&self) -> BTreeMap<String, String> {
        let opt = |o: Option<usize>| o.map_or("none".to_string(), |v| v.to_string());
        let mut m = BTreeMap::new();
        m.insert("data".into(), self.data_path.display().to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("train_fraction".into(), self.train_fraction.to_string());
        m.insert("stratify".into(), self.stratified.to_string());
        m.insert(
            "algorithms".into(),
            self.algorithms.iter().map(|k| k.name()).collect::<Vec<_>>().join(","),
        );
        m.insert(
            "zero_division".into(),
            match self.zero_division {
                ZeroDivision::Zero => "zero",
                ZeroDivision::One => "one",
            }
            .into(),
        );
        m.insert("cv_folds".into(), opt(self.cv_folds));
        m.insert("eval_subsample".into(), opt(self.eval_subsample));
        m.insert(
            "scaling".into(),
            match self.scaling {
                ScalingMode::FitOnTrain => "fit-on-train",
                ScalingMode::PerPartition => "per-partition",
            }
            .into(),
        );
        m.insert("rf.n_trees".into(), self.forest.n_trees.to_string());
        m.insert("rf.max_depth".into(), opt(self.forest.max_depth));
        m.insert("rf.min_samples_split".into(), self.forest.min_samples_split.to_string());
        m.insert("rf.mtry".into(), opt(self.forest.mtry));
        m.insert("rf.bootstrap_size_fraction".into(), self.forest.bootstrap_size_fraction.to_string());
        m.insert("lr.learning_rate".into(), self.logistic.learning_rate.to_string());
        m.insert("lr.epochs".into(), self.logistic.epochs.to_string());
        m.insert("lr.l2_lambda".into(), self.logistic.l2_lambda.to_string());
        m.insert(
            "lr.batch_size".into(),
            match self.logistic.batch_mode {
                BatchMode::Full => "full".to_string(),
                BatchMode::Minibatch(n) => n.to_string(),
            },
        );
        m.insert("knn.k".into(), self.knn.k.to_string());
        m.insert("svm.c".into(), self.svm.c.to_string());
        m.insert("svm.epochs".into(), self.svm.epochs.to_string());
        m.insert(
            "schema".into(),
            match self.schema {
                SchemaPolicy::Strict => "strict",
                SchemaPolicy::HeaderMapped => "header-mapped",
            }
            .into(),
        );
        m
    }
}
