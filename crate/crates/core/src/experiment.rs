//! End-to-end commands: ingest, train, evaluate, predict and the four-way
//! comparison experiment. The `fwlog` binary is a thin wrapper over these.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::dataset::{self, class_names, ClassDistribution, Dataset, IngestReport, SchemaPolicy};
use crate::learners::{self, LearnerKind, Model};
use crate::metrics::{confusion_matrix, Averages, ClassMetrics, ClassificationReport, ConfusionMatrix, ZeroDivision};
use crate::model_store::{self, ModelArtifact, TrainingMeta};
use crate::preprocess::{self, kfold_indices, split_indices, ScalerParams, ScalingMode, SplitIndices, SplitSpec};
use crate::{Error, Matrix, Result};

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Parses the input CSV and, when `report_dest` is given, writes the ingest
/// report there as JSON.
pub fn cmd_ingest(
    input: &Path,
    policy: SchemaPolicy,
    report_dest: Option<&Path>,
) -> Result<(IngestReport, ClassDistribution)> {
    let (ds, report) = dataset::parse_csv_path(input, policy)?;
    if let Some(dest) = report_dest {
        write_file(dest, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok((report, ds.class_distribution()))
}

/// A standardized train/test partition shared by every learner in a run.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    pub split: SplitIndices,
    /// Test positions (into `split.test`) that are actually scored.
    pub evaluated: Vec<usize>,
    pub scaler: ScalerParams,
    pub x_train: Matrix,
    pub y_train: Vec<usize>,
    pub x_test: Matrix,
    pub y_test: Vec<usize>,
    pub split_fingerprint: String,
}

fn indices_fingerprint(idx: &[usize]) -> String {
    let mut h = Sha256::new();
    for i in idx {
        h.update((*i as u64).to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn standardize(train: &Dataset, test: &Dataset, mode: ScalingMode) -> Result<(ScalerParams, Matrix, Matrix)> {
    preprocess::standardize_pair(train.matrix(), test.matrix(), mode)
}

pub fn split_spec(cfg: &ExperimentConfig) -> SplitSpec {
    SplitSpec::new(cfg.train_fraction, cfg.seed).stratified(cfg.stratified)
}

/// Split, optional test subsampling, and scaler fit on the training rows.
pub fn prepare_holdout(ds: &Dataset, cfg: &ExperimentConfig) -> Result<PreparedSplit> {
    let split = split_indices(ds.labels(), &split_spec(cfg))?;
    let evaluated: Vec<usize> = match cfg.eval_subsample {
        Some(m) => preprocess::subsample_indices(split.test.len(), m, cfg.seed),
        None => (0..split.test.len()).collect(),
    };
    let test_rows: Vec<usize> = evaluated.iter().map(|&p| split.test[p]).collect();
    let train = ds.subset(&split.train);
    let test = ds.subset(&test_rows);
    let (scaler, x_train, x_test) = standardize(&train, &test, cfg.scaling)?;
    Ok(PreparedSplit {
        split_fingerprint: indices_fingerprint(&split.train),
        evaluated,
        scaler,
        x_train,
        y_train: train.labels().to_vec(),
        x_test,
        y_test: test.labels().to_vec(),
        split,
    })
}

/// Fits `kind` on the prepared training rows and wraps it as an artifact.
pub fn train_artifact(
    kind: LearnerKind,
    cfg: &ExperimentConfig,
    data: &PreparedSplit,
    dataset_fingerprint: &str,
) -> Result<ModelArtifact> {
    let config = cfg.learner_config(kind);
    let model = learners::fit(&config, &data.x_train, &data.y_train, cfg.seed)?;
    let meta = TrainingMeta {
        seed: cfg.seed,
        config,
        dataset_fingerprint: dataset_fingerprint.to_string(),
        split_fingerprint: data.split_fingerprint.clone(),
        train_fraction: cfg.train_fraction,
        stratified: cfg.stratified,
        scaling: cfg.scaling,
        train_size: data.split.train.len() as u64,
        test_size: data.split.test.len() as u64,
    };
    Ok(ModelArtifact::new(data.scaler.clone(), model, meta))
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub artifact: ModelArtifact,
    pub train_size: usize,
    pub test_size: usize,
    pub elapsed: Duration,
}

/// Split, fit the scaler on train, fit the learner, save the artifact.
pub fn cmd_train(cfg: &ExperimentConfig, kind: LearnerKind, dest: &Path) -> Result<TrainSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let (ds, _) = dataset::parse_csv_path(&cfg.data_path, cfg.schema)?;
    let fp = ds.fingerprint()?;
    let data = prepare_holdout(&ds, cfg)?;
    let artifact = train_artifact(kind, cfg, &data, &fp)?;
    if let Some(dir) = dest.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    model_store::save(&artifact, dest)?;
    Ok(TrainSummary {
        artifact,
        train_size: data.split.train.len(),
        test_size: data.split.test.len(),
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: ClassificationReport,
    pub confusion: ConfusionMatrix,
    pub predictions: Vec<usize>,
    pub scores: Matrix,
}

/// Scores standardized rows and builds the report (with macro OvR AUC when defined).
pub fn evaluate_model(model: &Model, x: &Matrix, y: &[usize], policy: ZeroDivision) -> Result<Evaluation> {
    let scores = model.predict_scores(x)?;
    let predictions: Vec<usize> = scores.iter_rows().map(learners::argmax).collect();
    let confusion = confusion_matrix(y, &predictions)?;
    let mut report = ClassificationReport::from_confusion(&confusion, policy);
    if let Ok(auc) = crate::metrics::roc_auc_ovr_macro(y, &scores) {
        report.set_auc(&auc);
    }
    Ok(Evaluation {
        report,
        confusion,
        predictions,
        scores,
    })
}

/// Writes `<stem>_report.txt`, `<stem>_report.json` and `<stem>_confusion.csv`.
pub fn write_evaluation(dir: &Path, stem: &str, eval: &Evaluation) -> Result<()> {
    write_file(&dir.join(format!("{stem}_report.txt")), eval.report.render_text())?;
    write_file(&dir.join(format!("{stem}_report.json")), eval.report.render_json()? + "\n")?;
    write_file(&dir.join(format!("{stem}_confusion.csv")), eval.confusion.to_csv())?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalTarget {
    /// Every row of the given file.
    All,
    /// The test partition the artifact was trained against, recomputed from
    /// its recorded seed and split settings.
    HeldOut,
}

pub fn cmd_evaluate(
    artifact_path: &Path,
    data_path: &Path,
    target: EvalTarget,
    schema: SchemaPolicy,
    policy: ZeroDivision,
    out_dir: &Path,
) -> Result<Evaluation> {
    let artifact = model_store::load(artifact_path)?;
    let (ds, _) = dataset::parse_csv_path(data_path, schema)?;
    let rows = match target {
        EvalTarget::All => ds,
        EvalTarget::HeldOut => {
            let meta = &artifact.training_meta;
            if ds.fingerprint()? != meta.dataset_fingerprint {
                return Err(Error::Data(
                    "held-out evaluation needs the exact dataset the model was trained on (fingerprint differs)".into(),
                ));
            }
            let spec = SplitSpec::new(meta.train_fraction, meta.seed).stratified(meta.stratified);
            let split = split_indices(ds.labels(), &spec)?;
            ds.subset(&split.test)
        }
    };
    let x = artifact.scaler.transform(rows.matrix())?;
    let eval = evaluate_model(&artifact.params, &x, rows.labels(), policy)?;
    write_evaluation(out_dir, artifact.learner_kind.name(), &eval)?;
    Ok(eval)
}

/// Predicts every row of a feature-only CSV and writes the input columns
/// followed by `predicted_action` and one `score_<class>` column per class.
pub fn cmd_predict(artifact_path: &Path, input: &Path, output: &Path) -> Result<usize> {
    let artifact = model_store::load(artifact_path)?;
    let file = fs::File::open(input).map_err(|e| Error::io(input, e))?;
    let table = dataset::parse_feature_csv(std::io::BufReader::new(file))?;
    let (pred, scores) = artifact.predict_raw(&table.matrix)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = table.header.clone();
    header.push("predicted_action".into());
    header.extend(class_names().iter().map(|c| format!("score_{c}")));
    w.write_record(&header)?;
    for (i, raw) in table.raw_rows.iter().enumerate() {
        let mut rec = raw.clone();
        rec.push(class_names()[pred[i]].to_string());
        rec.extend(scores.row(i).iter().map(|s| s.to_string()));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    write_file(output, bytes)?;
    Ok(table.raw_rows.len())
}

/// One learner's line in the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: LearnerKind,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub auc_macro_ovr: Option<f64>,
    pub split_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: u64,
    pub fingerprint: String,
    pub class_counts: [u64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub config: std::collections::BTreeMap<String, String>,
    pub dataset: DatasetSummary,
    pub train_size: u64,
    pub test_size: u64,
    pub evaluated_size: u64,
    pub zero_division: ZeroDivision,
    pub auc_averaging: String,
    pub methods: Vec<MethodResult>,
}

impl Comparison {
    /// Per-class precision/recall/F1 per method, with accuracy and AUC on the
    /// method's first line.
    pub fn render_text(&self) -> String {
        let r2 = crate::metrics::round2;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<8}{:<12}{:>10}{:>8}{:>10}{:>10}{:>7}",
            "Method", "Class", "Precision", "Recall", "F1-Score", "Accuracy", "AUC"
        );
        for m in &self.methods {
            for (k, (name, row)) in class_names().iter().zip(&m.per_class).enumerate() {
                let (method, acc, auc) = if k == 0 {
                    (
                        m.method.name().to_uppercase(),
                        r2(m.accuracy),
                        m.auc_macro_ovr.map_or("-".to_string(), r2),
                    )
                } else {
                    (String::new(), String::new(), String::new())
                };
                let _ = writeln!(
                    s,
                    "{method:<8}{name:<12}{:>10}{:>8}{:>10}{acc:>10}{auc:>7}",
                    r2(row.precision),
                    r2(row.recall),
                    r2(row.f1)
                );
            }
        }
        let _ = writeln!(
            s,
            "\ntrain {} / test {} / evaluated {}; zero_division={}; AUC averaging {}",
            self.train_size,
            self.test_size,
            self.evaluated_size,
            match self.zero_division {
                ZeroDivision::Zero => "zero",
                ZeroDivision::One => "one",
            },
            self.auc_averaging
        );
        s
    }
}

/// Per-fold scalar metrics in cross-validation mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub auc_macro_ovr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample standard deviation (n - 1); zero for a single value.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(MeanStd { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvMethod {
    pub method: LearnerKind,
    pub folds: Vec<FoldMetrics>,
    pub accuracy: MeanStd,
    pub macro_f1: MeanStd,
    pub weighted_f1: MeanStd,
    pub auc_macro_ovr: Option<MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub config: std::collections::BTreeMap<String, String>,
    pub dataset: DatasetSummary,
    pub folds: usize,
    pub methods: Vec<CvMethod>,
}

impl CvSummary {
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}-fold cross-validation, {} rows", self.folds, self.dataset.rows);
        let _ = writeln!(s, "{:<8}{:>18}{:>18}{:>18}{:>18}", "Method", "Accuracy", "Macro F1", "Weighted F1", "AUC");
        let f = |m: &MeanStd| format!("{:.4} ± {:.4}", m.mean, m.std);
        for m in &self.methods {
            let _ = writeln!(
                s,
                "{:<8}{:>18}{:>18}{:>18}{:>18}",
                m.method.name().to_uppercase(),
                f(&m.accuracy),
                f(&m.macro_f1),
                f(&m.weighted_f1),
                m.auc_macro_ovr.as_ref().map_or("-".into(), f)
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutcome {
    Holdout {
        comparison: Comparison,
        evaluations: Vec<(LearnerKind, Evaluation)>,
        artifacts: Vec<ModelArtifact>,
    },
    CrossValidation(CvSummary),
}

/// Settings recorded with results; the input path is left out because the
/// dataset fingerprint identifies the data.
fn recorded_config(cfg: &ExperimentConfig) -> std::collections::BTreeMap<String, String> {
    let mut kv = cfg.to_kv();
    kv.remove("data");
    kv
}

fn dataset_summary(ds: &Dataset) -> Result<DatasetSummary> {
    Ok(DatasetSummary {
        rows: ds.n() as u64,
        fingerprint: ds.fingerprint()?,
        class_counts: ds.class_distribution().counts,
    })
}

/// Runs the experiment on an in-memory dataset without touching the filesystem.
pub fn run_experiment(ds: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let summary = dataset_summary(ds)?;
    match cfg.cv_folds {
        None => {
            let data = prepare_holdout(ds, cfg)?;
            let mut methods = Vec::new();
            let mut evaluations = Vec::new();
            let mut artifacts = Vec::new();
            for &kind in &cfg.algorithms {
                let artifact = train_artifact(kind, cfg, &data, &summary.fingerprint)?;
                let eval = evaluate_model(&artifact.params, &data.x_test, &data.y_test, cfg.zero_division)?;
                methods.push(MethodResult {
                    method: kind,
                    accuracy: eval.report.accuracy,
                    per_class: eval.report.per_class.clone(),
                    macro_avg: eval.report.macro_avg,
                    weighted_avg: eval.report.weighted_avg,
                    auc_macro_ovr: eval.report.auc_macro_ovr,
                    split_fingerprint: artifact.training_meta.split_fingerprint.clone(),
                });
                evaluations.push((kind, eval));
                artifacts.push(artifact);
            }
            Ok(ExperimentOutcome::Holdout {
                comparison: Comparison {
                    config: recorded_config(cfg),
                    dataset: summary,
                    train_size: data.split.train.len() as u64,
                    test_size: data.split.test.len() as u64,
                    evaluated_size: data.y_test.len() as u64,
                    zero_division: cfg.zero_division,
                    auc_averaging: "macro-ovr".into(),
                    methods,
                },
                evaluations,
                artifacts,
            })
        }
        Some(k) => {
            let folds = kfold_indices(ds.n(), k, cfg.seed)?;
            let mut per_method: Vec<Vec<FoldMetrics>> = vec![Vec::new(); cfg.algorithms.len()];
            for fold in &folds {
                let train = ds.subset(&fold.train);
                let test = ds.subset(&fold.test);
                let (_, xtr, xte) = standardize(&train, &test, cfg.scaling)?;
                for (slot, &kind) in per_method.iter_mut().zip(&cfg.algorithms) {
                    let model = learners::fit(&cfg.learner_config(kind), &xtr, train.labels(), cfg.seed)?;
                    let eval = evaluate_model(&model, &xte, test.labels(), cfg.zero_division)?;
                    slot.push(FoldMetrics {
                        accuracy: eval.report.accuracy,
                        macro_f1: eval.report.macro_avg.f1,
                        weighted_f1: eval.report.weighted_avg.f1,
                        auc_macro_ovr: eval.report.auc_macro_ovr,
                    });
                }
            }
            let methods = cfg
                .algorithms
                .iter()
                .zip(per_method)
                .map(|(&method, folds)| {
                    let col = |f: fn(&FoldMetrics) -> f64| MeanStd::of(&folds.iter().map(f).collect::<Vec<_>>()).expect("k >= 2 folds");
                    let aucs: Vec<f64> = folds.iter().filter_map(|f| f.auc_macro_ovr).collect();
                    CvMethod {
                        method,
                        accuracy: col(|f| f.accuracy),
                        macro_f1: col(|f| f.macro_f1),
                        weighted_f1: col(|f| f.weighted_f1),
                        auc_macro_ovr: MeanStd::of(&aucs),
                        folds,
                    }
                })
                .collect();
            Ok(ExperimentOutcome::CrossValidation(CvSummary {
                config: recorded_config(cfg),
                dataset: summary,
                folds: k,
                methods,
            }))
        }
    }
}

/// Files written by [`cmd_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentFiles {
    pub outcome: ExperimentOutcome,
    pub written: Vec<PathBuf>,
}

/// Loads `cfg.data_path`, runs the experiment and writes every output under
/// `cfg.out_dir`.
pub fn cmd_experiment(cfg: &ExperimentConfig) -> Result<ExperimentFiles> {
    cfg.validate()?;
    let (ds, _) = dataset::parse_csv_path(&cfg.data_path, cfg.schema)?;
    let outcome = run_experiment(&ds, cfg)?;
    let dir = &cfg.out_dir;
    let mut written = Vec::new();
    let mut put = |name: String, contents: Vec<u8>| -> Result<()> {
        let p = dir.join(name);
        write_file(&p, contents)?;
        written.push(p);
        Ok(())
    };
    match &outcome {
        ExperimentOutcome::Holdout {
            comparison,
            evaluations,
            artifacts,
        } => {
            put("comparison.txt".into(), comparison.render_text().into_bytes())?;
            put("comparison.json".into(), (serde_json::to_string_pretty(comparison)? + "\n").into_bytes())?;
            for ((kind, eval), artifact) in evaluations.iter().zip(artifacts) {
                put(format!("{kind}_report.txt"), eval.report.render_text().into_bytes())?;
                put(format!("{kind}_report.json"), (eval.report.render_json()? + "\n").into_bytes())?;
                put(format!("{kind}_confusion.csv"), eval.confusion.to_csv().into_bytes())?;
                put(format!("{kind}_model.json"), artifact.to_json()?.into_bytes())?;
            }
        }
        ExperimentOutcome::CrossValidation(cv) => {
            put("cv_summary.txt".into(), cv.render_text().into_bytes())?;
            put("cv_summary.json".into(), (serde_json::to_string_pretty(cv)? + "\n").into_bytes())?;
        }
    }
    Ok(ExperimentFiles { outcome, written })
}
