//! One-vs-rest linear SVM: per-class hyperplanes and the effect of C.

use std::path::{Path, PathBuf};

use fwlog::dataset::{class_names, parse_csv_path, Dataset, SchemaPolicy};
use fwlog::learners::{LinearSvm, SvmConfig};
use fwlog::preprocess::{shuffle_split, ScalerParams, SplitSpec};
use fwlog::{learners, synth};

fn load(path: Option<&Path>) -> fwlog::Result<Dataset> {
    match path {
        Some(p) => Ok(parse_csv_path(p, SchemaPolicy::HeaderMapped)?.0),
        None => Ok(synth::firewall_log(3000, 14)),
    }
}

/// Held-out accuracy for C = 0.01, 1, 100.
pub fn run_example(path: Option<&Path>) -> fwlog::Result<Vec<(f64, f64)>> {
    let ds = load(path)?;
    let (train, test) = shuffle_split(&ds, &SplitSpec::new(0.7, 42))?;
    let scaler = ScalerParams::fit(train.matrix())?;
    let x_train = scaler.transform(train.matrix())?;
    let x_test = scaler.transform(test.matrix())?;
    let mut out = Vec::new();
    for c in [0.01, 1.0, 100.0] {
        let config = SvmConfig { c, ..SvmConfig::default() };
        let svm = LinearSvm::fit(&config, &x_train, train.labels(), 42)?;
        let correct = x_test
            .iter_rows()
            .zip(test.labels())
            .filter(|(row, &y)| learners::argmax(&svm.predict_scores_row(row)) == y)
            .count();
        let acc = correct as f64 / test.n() as f64;
        println!("C = {c}: accuracy {acc:.4}");
        if c == 1.0 {
            for (k, name) in class_names().iter().enumerate() {
                let norm = svm.weights.row(k).iter().map(|w| w * w).sum::<f64>().sqrt();
                println!("  {name:<11} |w| = {norm:.3}  b = {:+.3}", svm.biases[k]);
            }
        }
        out.push((c, acc));
    }
    Ok(out)
}

fn main() -> fwlog::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from);
    run_example(path.as_deref()).map(|_| ())
}
