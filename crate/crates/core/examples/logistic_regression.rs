//! Multinomial logistic regression: loss curve and held-out report.

use std::path::{Path, PathBuf};

use fwlog::dataset::{parse_csv_path, Dataset, SchemaPolicy};
use fwlog::learners::{LogisticConfig, LogisticModel};
use fwlog::metrics::{ClassificationReport, ZeroDivision};
use fwlog::preprocess::{shuffle_split, ScalerParams, SplitSpec};
use fwlog::{learners, synth, Matrix};

fn load(path: Option<&Path>) -> fwlog::Result<Dataset> {
    match path {
        Some(p) => Ok(parse_csv_path(p, SchemaPolicy::HeaderMapped)?.0),
        None => Ok(synth::firewall_log(3000, 12)),
    }
}

/// Returns the per-epoch training loss and the held-out report.
pub fn run_example(path: Option<&Path>) -> fwlog::Result<(Vec<f64>, ClassificationReport)> {
    let ds = load(path)?;
    let (train, test) = shuffle_split(&ds, &SplitSpec::new(0.7, 42))?;
    let scaler = ScalerParams::fit(train.matrix())?;
    let config = LogisticConfig::default();
    let (model, losses) =
        LogisticModel::fit_with_history(&config, &scaler.transform(train.matrix())?, train.labels(), 42)?;
    for (epoch, loss) in losses.iter().enumerate().step_by(50) {
        println!("epoch {epoch:>4}  loss {loss:.5}");
    }
    println!("final       loss {:.5}", losses[losses.len() - 1]);

    let x_test = scaler.transform(test.matrix())?;
    let mut scores = Matrix::zeros(x_test.rows(), 4);
    for (i, row) in x_test.iter_rows().enumerate() {
        scores.row_mut(i).copy_from_slice(&model.predict_scores_row(row));
    }
    let pred: Vec<usize> = scores.iter_rows().map(learners::argmax).collect();
    let report = ClassificationReport::build(test.labels(), &pred, Some(&scores), ZeroDivision::One)?;
    print!("\n{}", report.render_text());
    Ok((losses, report))
}

fn main() -> fwlog::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from);
    run_example(path.as_deref()).map(|_| ())
}
