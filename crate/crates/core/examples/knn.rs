//! k-nearest neighbours for several k on standardized features.

use std::path::{Path, PathBuf};

use fwlog::dataset::{parse_csv_path, Dataset, SchemaPolicy};
use fwlog::learners::{fit, KnnConfig, LearnerConfig};
use fwlog::metrics::confusion_matrix;
use fwlog::preprocess::{shuffle_split, ScalerParams, SplitSpec};
use fwlog::synth;

fn load(path: Option<&Path>) -> fwlog::Result<Dataset> {
    match path {
        Some(p) => Ok(parse_csv_path(p, SchemaPolicy::HeaderMapped)?.0),
        None => Ok(synth::firewall_log(2000, 13)),
    }
}

/// Held-out accuracy for k = 1, 3, 5, 9.
pub fn run_example(path: Option<&Path>) -> fwlog::Result<Vec<(usize, f64)>> {
    let ds = load(path)?;
    let (train, test) = shuffle_split(&ds, &SplitSpec::new(0.7, 42))?;
    let scaler = ScalerParams::fit(train.matrix())?;
    let x_train = scaler.transform(train.matrix())?;
    let x_test = scaler.transform(test.matrix())?;
    let mut out = Vec::new();
    for k in [1, 3, 5, 9] {
        let model = fit(&LearnerConfig::Knn(KnnConfig { k }), &x_train, train.labels(), 0)?;
        let cm = confusion_matrix(test.labels(), &model.predict(&x_test)?)?;
        println!("k = {k}: accuracy {:.4}", cm.accuracy());
        out.push((k, cm.accuracy()));
    }
    Ok(out)
}

fn main() -> fwlog::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from);
    run_example(path.as_deref()).map(|_| ())
}
