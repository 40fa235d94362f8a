//! The four-way comparison on one shared split.
//!
//!     cargo run --release --example experiment -- path/to/log2.csv

use std::path::{Path, PathBuf};

use fwlog::config::ExperimentConfig;
use fwlog::dataset::{parse_csv_path, Dataset};
use fwlog::experiment::{run_experiment, Comparison, ExperimentOutcome};
use fwlog::{synth, Error};

pub fn run_example(path: Option<&Path>) -> fwlog::Result<Comparison> {
    let mut cfg = ExperimentConfig::default();
    let ds: Dataset = match path {
        Some(p) => parse_csv_path(p, cfg.schema)?.0,
        None => {
            cfg.forest.n_trees = 30;
            synth::firewall_log(3000, 16)
        }
    };
    match run_experiment(&ds, &cfg)? {
        ExperimentOutcome::Holdout { comparison, evaluations, .. } => {
            print!("{}", comparison.render_text());
            for (kind, eval) in &evaluations {
                println!("\n{}\n{}", kind.title(), eval.report.render_text());
            }
            Ok(comparison)
        }
        ExperimentOutcome::CrossValidation(_) => Err(Error::Config("expected holdout mode".into())),
    }
}

fn main() -> fwlog::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from);
    run_example(path.as_deref()).map(|_| ())
}
