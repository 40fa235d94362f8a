use std::fs;
use std::path::{Path, PathBuf};

use fwlog::config::ExperimentConfig;
use fwlog::dataset::{class_names, SchemaPolicy, FEATURE_NAMES};
use fwlog::experiment::{
    cmd_evaluate, cmd_experiment, cmd_ingest, cmd_predict, cmd_train, run_experiment, EvalTarget, ExperimentOutcome,
};
use fwlog::learners::{KnnConfig, LearnerKind};
use fwlog::metrics::{ClassificationReport, ZeroDivision};
use fwlog::{synth, Error};

fn write_log(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("log-{n}-{seed}.csv"));
    fs::write(&path, synth::firewall_log(n, seed).render_csv().unwrap()).unwrap();
    path
}

fn quick(data: &Path, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.data_path = data.to_path_buf();
    cfg.out_dir = out.to_path_buf();
    cfg.forest.n_trees = 20;
    cfg.logistic.epochs = 100;
    cfg.svm.epochs = 15;
    cfg
}

/// Artifact text without its `created_at` line.
fn without_timestamp(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with("\"created_at\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn experiment_outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_log(tmp.path(), 2000, 1);
    let a = cmd_experiment(&quick(&data, &tmp.path().join("a"))).unwrap();
    let b = cmd_experiment(&quick(&data, &tmp.path().join("b"))).unwrap();
    assert_eq!(a.written.len(), 2 + 4 * 4);
    for (pa, pb) in a.written.iter().zip(&b.written) {
        assert_eq!(pa.file_name(), pb.file_name());
        let (ta, tb) = (fs::read_to_string(pa).unwrap(), fs::read_to_string(pb).unwrap());
        if pa.to_string_lossy().ends_with("_model.json") {
            assert_eq!(without_timestamp(&ta), without_timestamp(&tb));
        } else {
            assert_eq!(ta, tb, "{}", pa.display());
        }
    }
}

#[test]
fn learners_share_one_partition_and_scaler() {
    let ds = synth::firewall_log(1500, 2);
    let mut cfg = quick(Path::new("unused"), Path::new("unused"));
    cfg.eval_subsample = Some(200);
    let ExperimentOutcome::Holdout { comparison, artifacts, evaluations } = run_experiment(&ds, &cfg).unwrap() else {
        panic!("holdout expected")
    };
    assert_eq!(artifacts.len(), 4);
    for a in &artifacts[1..] {
        assert_eq!(a.training_meta.split_fingerprint, artifacts[0].training_meta.split_fingerprint);
        assert_eq!(a.training_meta.dataset_fingerprint, artifacts[0].training_meta.dataset_fingerprint);
        assert_eq!(a.scaler, artifacts[0].scaler);
    }
    assert_eq!(comparison.train_size, 1050);
    assert_eq!(comparison.test_size, 450);
    assert_eq!(comparison.evaluated_size, 200);
    for (kind, eval) in &evaluations {
        assert_eq!(eval.report.total, 200, "{kind}");
        assert!(eval.report.auc_macro_ovr.is_some(), "{kind}");
    }
    let text = comparison.render_text();
    for m in ["RF", "LR", "KNN", "SVM"] {
        assert!(text.lines().any(|l| l.starts_with(m)), "{text}");
    }
}

#[test]
fn cross_validation_reports_every_fold() {
    let ds = synth::firewall_log(600, 3);
    let mut cfg = quick(Path::new("unused"), Path::new("unused"));
    cfg.cv_folds = Some(4);
    cfg.algorithms = vec![LearnerKind::Lr, LearnerKind::Knn];
    let ExperimentOutcome::CrossValidation(cv) = run_experiment(&ds, &cfg).unwrap() else {
        panic!("cv expected")
    };
    assert_eq!(cv.folds, 4);
    assert_eq!(cv.methods.len(), 2);
    for m in &cv.methods {
        assert_eq!(m.folds.len(), 4);
        let accs: Vec<f64> = m.folds.iter().map(|f| f.accuracy).collect();
        let mean = accs.iter().sum::<f64>() / 4.0;
        assert!((m.accuracy.mean - mean).abs() < 1e-12);
        assert!(m.accuracy.std >= 0.0);
    }
    assert!(cv.render_text().contains('±'));
}

#[test]
fn unknown_algorithm_lists_valid_names() {
    let mut cfg = ExperimentConfig::default();
    let err = cfg.set("algorithms", "rf,xgboost").unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(err.to_string().contains("rf, lr, knn, svm"), "{err}");
}

#[test]
fn ingest_reports_rejected_rows_and_missing_files() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_log(tmp.path(), 50, 4);
    let mut text = fs::read_to_string(&data).unwrap();
    text.push_str("1,2,3,4,allow,lots,1,1,1,1,1,1\n");
    fs::write(&data, text).unwrap();
    let dest = tmp.path().join("r/ingest.json");
    let (rep, dist) = cmd_ingest(&data, SchemaPolicy::HeaderMapped, Some(&dest)).unwrap();
    assert_eq!(rep.rows_accepted, 50);
    assert_eq!(rep.rows_rejected, 1);
    assert_eq!(rep.rejection_reasons[0].line, 52);
    assert_eq!(dist.total(), 50);
    assert!(fs::read_to_string(dest).unwrap().contains("\"rows_rejected\": 1"));

    let err = cmd_ingest(&tmp.path().join("missing.csv"), SchemaPolicy::HeaderMapped, None).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn train_records_meta_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_log(tmp.path(), 65_532, 5);
    let cfg = quick(&data, tmp.path());
    let a = cmd_train(&cfg, LearnerKind::Knn, &tmp.path().join("a/knn.json")).unwrap();
    assert_eq!((a.train_size, a.test_size), (45_872, 19_660));
    assert_eq!(a.artifact.training_meta.seed, 42);
    assert_eq!(a.artifact.training_meta.train_size, 45_872);
    assert_eq!(a.artifact.training_meta.test_size, 19_660);

    let small = write_log(tmp.path(), 1000, 6);
    let cfg = quick(&small, tmp.path());
    cmd_train(&cfg, LearnerKind::Rf, &tmp.path().join("rf1.json")).unwrap();
    cmd_train(&cfg, LearnerKind::Rf, &tmp.path().join("rf2.json")).unwrap();
    let read = |p: &str| without_timestamp(&fs::read_to_string(tmp.path().join(p)).unwrap());
    assert_eq!(read("rf1.json"), read("rf2.json"));
}

#[test]
fn evaluate_writes_reports_for_every_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_log(tmp.path(), 1500, 7);
    let cfg = quick(&data, tmp.path());
    for kind in LearnerKind::ALL {
        let model = tmp.path().join(format!("{kind}.json"));
        cmd_train(&cfg, kind, &model).unwrap();
        let out = tmp.path().join("eval");
        let eval = cmd_evaluate(&model, &data, EvalTarget::HeldOut, cfg.schema, ZeroDivision::One, &out).unwrap();
        assert_eq!(eval.report.total, 450);
        let json = fs::read_to_string(out.join(format!("{kind}_report.json"))).unwrap();
        let parsed = ClassificationReport::from_json(&json).unwrap();
        assert!(parsed.auc_macro_ovr.is_some(), "{kind}");
        let text = fs::read_to_string(out.join(format!("{kind}_report.txt"))).unwrap();
        let positions: Vec<usize> = class_names().iter().map(|c| text.find(c).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{text}");
        assert!(out.join(format!("{kind}_confusion.csv")).exists());
    }
}

#[test]
fn training_rows_score_at_least_as_well_as_held_out_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_log(tmp.path(), 1500, 8);
    let cfg = quick(&data, tmp.path());
    let model = tmp.path().join("rf.json");
    let trained = cmd_train(&cfg, LearnerKind::Rf, &model).unwrap();
    let held = cmd_evaluate(&model, &data, EvalTarget::HeldOut, cfg.schema, ZeroDivision::One, tmp.path()).unwrap();

    let ds = synth::firewall_log(1500, 8);
    let split = fwlog::preprocess::split_indices(ds.labels(), &fwlog::experiment::split_spec(&cfg)).unwrap();
    let train_path = tmp.path().join("train.csv");
    fs::write(&train_path, ds.subset(&split.train).render_csv().unwrap()).unwrap();
    let own = cmd_evaluate(&model, &train_path, EvalTarget::All, cfg.schema, ZeroDivision::One, tmp.path()).unwrap();
    assert_eq!(own.report.total as usize, trained.train_size);
    assert!(own.report.accuracy >= held.report.accuracy);
}

#[test]
fn held_out_evaluation_needs_the_training_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_log(tmp.path(), 500, 9);
    let other = write_log(tmp.path(), 500, 10);
    let cfg = quick(&data, tmp.path());
    let model = tmp.path().join("lr.json");
    cmd_train(&cfg, LearnerKind::Lr, &model).unwrap();
    let err = cmd_evaluate(&model, &other, EvalTarget::HeldOut, cfg.schema, ZeroDivision::One, tmp.path());
    assert!(matches!(err, Err(Error::Data(_))));
}

fn feature_csv(ds: &fwlog::dataset::Dataset) -> String {
    let mut s = FEATURE_NAMES.join(",");
    s.push('\n');
    for row in ds.matrix().iter_rows() {
        s.push_str(&row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

#[test]
fn predict_output_shape_and_memorization() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_log(tmp.path(), 800, 11);
    let mut cfg = quick(&data, tmp.path());
    cfg.knn = KnnConfig { k: 1 };
    let model = tmp.path().join("knn.json");
    cmd_train(&cfg, LearnerKind::Knn, &model).unwrap();

    // Header only in, header only out.
    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, FEATURE_NAMES.join(",") + "\n").unwrap();
    let out = tmp.path().join("pred-empty.csv");
    assert_eq!(cmd_predict(&model, &empty, &out).unwrap(), 0);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("Source Port,") && text.trim_end().ends_with("score_reset-both"));

    // Training rows come back with their own labels.
    let ds = synth::firewall_log(800, 11);
    let split = fwlog::preprocess::split_indices(ds.labels(), &fwlog::experiment::split_spec(&cfg)).unwrap();
    let train = ds.subset(&split.train[..50]);
    let input = tmp.path().join("train-features.csv");
    fs::write(&input, feature_csv(&train)).unwrap();
    let out = tmp.path().join("pred.csv");
    assert_eq!(cmd_predict(&model, &input, &out).unwrap(), 50);
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let col = rdr.headers().unwrap().iter().position(|h| h == "predicted_action").unwrap();
    let predicted: Vec<String> = rdr.records().map(|r| r.unwrap()[col].to_string()).collect();
    let truth: Vec<String> = train.labels().iter().map(|&l| class_names()[l].to_string()).collect();
    assert_eq!(predicted, truth);

    // Unknown column names the expected header.
    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "Source Port,Colour\n1,2\n").unwrap();
    let err = cmd_predict(&model, &bad, &out).unwrap_err();
    assert!(err.to_string().contains("Destination Port"), "{err}");
}
