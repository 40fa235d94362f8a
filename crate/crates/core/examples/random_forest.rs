//! Train a random forest on a 70/30 split and print the report and
//! impurity-based feature importance.

use std::path::{Path, PathBuf};

use fwlog::dataset::{parse_csv_path, Dataset, SchemaPolicy, FEATURE_NAMES};
use fwlog::learners::{fit, ForestConfig, LearnerConfig};
use fwlog::metrics::{ClassificationReport, ZeroDivision};
use fwlog::preprocess::{shuffle_split, ScalerParams, SplitSpec};
use fwlog::synth;

fn load(path: Option<&Path>) -> fwlog::Result<Dataset> {
    match path {
        Some(p) => Ok(parse_csv_path(p, SchemaPolicy::HeaderMapped)?.0),
        None => Ok(synth::firewall_log(3000, 11)),
    }
}

pub fn run_example(path: Option<&Path>) -> fwlog::Result<ClassificationReport> {
    let ds = load(path)?;
    let (train, test) = shuffle_split(&ds, &SplitSpec::new(0.7, 42))?;
    let scaler = ScalerParams::fit(train.matrix())?;
    let config = LearnerConfig::Rf(ForestConfig {
        n_trees: 50,
        ..ForestConfig::default()
    });
    let model = fit(&config, &scaler.transform(train.matrix())?, train.labels(), 42)?;

    let x_test = scaler.transform(test.matrix())?;
    let scores = model.predict_scores(&x_test)?;
    let pred = model.predict(&x_test)?;
    let report = ClassificationReport::build(test.labels(), &pred, Some(&scores), ZeroDivision::One)?;
    print!("{}", report.render_text());

    let mut importance: Vec<(f64, &str)> =
        model.feature_importance()?.into_iter().zip(FEATURE_NAMES).collect();
    importance.sort_by(|a, b| b.0.total_cmp(&a.0));
    println!("\nfeature importance");
    for (v, name) in importance {
        println!("  {name:<22}{v:.4}");
    }
    Ok(report)
}

fn main() -> fwlog::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from);
    run_example(path.as_deref()).map(|_| ())
}
