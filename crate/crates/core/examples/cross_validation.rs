//! k-fold cross-validation with per-fold metrics and mean ± std.

use std::path::{Path, PathBuf};

use fwlog::config::ExperimentConfig;
use fwlog::dataset::parse_csv_path;
use fwlog::experiment::{run_experiment, CvSummary, ExperimentOutcome};
use fwlog::learners::LearnerKind;
use fwlog::{synth, Error};

pub fn run_example(path: Option<&Path>) -> fwlog::Result<CvSummary> {
    let mut cfg = ExperimentConfig::default();
    cfg.cv_folds = Some(5);
    cfg.algorithms = vec![LearnerKind::Lr, LearnerKind::Knn, LearnerKind::Svm];
    let ds = match path {
        Some(p) => parse_csv_path(p, cfg.schema)?.0,
        None => synth::firewall_log(1500, 17),
    };
    match run_experiment(&ds, &cfg)? {
        ExperimentOutcome::CrossValidation(cv) => {
            print!("{}", cv.render_text());
            for m in &cv.methods {
                let accs: Vec<String> = m.folds.iter().map(|f| format!("{:.3}", f.accuracy)).collect();
                println!("{:<4} folds: {}", m.method.name(), accs.join(" "));
            }
            Ok(cv)
        }
        ExperimentOutcome::Holdout { .. } => Err(Error::Config("expected cv mode".into())),
    }
}

fn main() -> fwlog::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from);
    run_example(path.as_deref()).map(|_| ())
}
