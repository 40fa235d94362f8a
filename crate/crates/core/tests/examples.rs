//! Runs every example on its built-in synthetic data.

#[allow(dead_code)]
#[path = "../examples/ingest.rs"]
mod ingest;

#[allow(dead_code)]
#[path = "../examples/random_forest.rs"]
mod random_forest;

#[allow(dead_code)]
#[path = "../examples/logistic_regression.rs"]
mod logistic_regression;

#[allow(dead_code)]
#[path = "../examples/knn.rs"]
mod knn;

#[allow(dead_code)]
#[path = "../examples/svm.rs"]
mod svm;

#[allow(dead_code)]
#[path = "../examples/classification_report.rs"]
mod classification_report;

#[allow(dead_code)]
#[path = "../examples/model_roundtrip.rs"]
mod model_roundtrip;

#[allow(dead_code)]
#[path = "../examples/experiment.rs"]
mod experiment;

#[allow(dead_code)]
#[path = "../examples/cross_validation.rs"]
mod cross_validation;

#[allow(dead_code)]
#[path = "../examples/synthetic_log.rs"]
mod synthetic_log;

#[test]
fn ingest_example() {
    let report = ingest::run_example(None).unwrap();
    assert_eq!(report.rows_accepted, 500);
    assert_eq!(report.rows_rejected, 2);
}

#[test]
fn random_forest_example() {
    let report = random_forest::run_example(None).unwrap();
    assert!(report.accuracy > 0.95, "{}", report.accuracy);
}

#[test]
fn logistic_regression_example() {
    let (losses, report) = logistic_regression::run_example(None).unwrap();
    assert!(losses.last().unwrap() < &losses[0]);
    assert!(report.accuracy > 0.7);
}

#[test]
fn knn_example() {
    let out = knn::run_example(None).unwrap();
    assert_eq!(out.len(), 4);
    assert!(out.iter().all(|&(_, acc)| acc > 0.85));
}

#[test]
fn svm_example() {
    let out = svm::run_example(None).unwrap();
    assert!(out[1].1 > 0.85, "{out:?}");
}

#[test]
fn classification_report_example() {
    let (one, zero) = classification_report::run_example().unwrap();
    assert_eq!(one.per_class[3].precision, 1.0);
    assert_eq!(zero.per_class[3].precision, 0.0);
    assert!(one.zero_division_warning);
}

#[test]
fn model_roundtrip_example() {
    let dir = tempfile::tempdir().unwrap();
    let artifact = model_roundtrip::run_example(dir.path()).unwrap();
    assert!(dir.path().join("lr_model.json").exists());
    assert_eq!(artifact.label_map.len(), 4);
}

#[test]
fn experiment_example() {
    let comparison = experiment::run_example(None).unwrap();
    assert_eq!(comparison.methods.len(), 4);
}

#[test]
fn cross_validation_example() {
    let cv = cross_validation::run_example(None).unwrap();
    assert_eq!(cv.folds, 5);
    assert_eq!(cv.methods.len(), 3);
}

#[test]
fn synthetic_log_example() {
    let bytes = synthetic_log::run_example(100, 1).unwrap();
    let text = String::from_utf8(bytes).unwrap();
    assert_eq!(text.lines().count(), 101);
}
