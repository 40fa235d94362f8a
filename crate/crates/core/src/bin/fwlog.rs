//! `fwlog` command-line front end.
//!
//! Exit codes: 0 success, 1 other failure, 2 usage or configuration error,
//! 3 data error (unreadable input, bad header, no usable rows, corrupt
//! artifact), 4 numeric failure during training or evaluation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fwlog::config::ExperimentConfig;
use fwlog::experiment::{self, EvalTarget, ExperimentOutcome};
use fwlog::learners::LearnerKind;
use fwlog::{Error, Result};

#[derive(Parser)]
#[command(name = "fwlog", version, about = "Firewall log action classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// Labelled firewall log CSV.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Preserve class proportions in the train/test split.
    #[arg(long)]
    stratify: bool,
    /// Comma-separated subset of rf, lr, knn, svm.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// zero or one.
    #[arg(long)]
    zero_division: Option<String>,
    #[arg(long)]
    cv_folds: Option<usize>,
    #[arg(long)]
    eval_subsample: Option<usize>,
    /// Flat key = value config file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra config override, `key=value`; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects key=value, got {kv:?}")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(p) = &self.data {
            cfg.data_path = p.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(f) = self.train_fraction {
            cfg.set("train_fraction", &f.to_string())?;
        }
        if self.stratify {
            cfg.stratified = true;
        }
        if let Some(a) = &self.algo {
            cfg.set("algorithms", a)?;
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = d.clone();
        }
        if let Some(z) = &self.zero_division {
            cfg.set("zero_division", z)?;
        }
        if let Some(k) = self.cv_folds {
            cfg.set("cv_folds", &k.to_string())?;
        }
        if let Some(m) = self.eval_subsample {
            cfg.set("eval_subsample", &m.to_string())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a log export and report accepted/rejected rows and class counts.
    Ingest {
        #[command(flatten)]
        common: Common,
        /// Where to write the JSON ingest report (default <out-dir>/ingest_report.json).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Split, standardize, fit one learner and save its artifact.
    Train {
        #[command(flatten)]
        common: Common,
        /// Artifact path (default <out-dir>/<algo>_model.json).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Score a saved model on a dataset, or on its own held-out split.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// Re-derive and score the test partition recorded in the artifact.
        #[arg(long)]
        held_out: bool,
    },
    /// Predict actions for a feature-only CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train and compare the selected learners on one shared split (or CV folds).
    Experiment {
        #[command(flatten)]
        common: Common,
    },
}

fn single_algo(cfg: &ExperimentConfig) -> Result<LearnerKind> {
    match cfg.algorithms.as_slice() {
        [k] => Ok(*k),
        _ => Err(Error::Config("train needs exactly one --algo (rf, lr, knn, svm)".into())),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { common, report } => {
            let cfg = common.resolve()?;
            let dest = report.unwrap_or_else(|| cfg.out_dir.join("ingest_report.json"));
            let (rep, dist) = experiment::cmd_ingest(&cfg.data_path, cfg.schema, Some(&dest))?;
            println!(
                "rows read {}, accepted {}, rejected {}",
                rep.rows_read, rep.rows_accepted, rep.rows_rejected
            );
            for r in rep.rejection_reasons.iter().take(10) {
                println!("  line {}: {}", r.line, r.reason);
            }
            println!("{dist}");
            println!("report written to {}", dest.display());
        }
        Command::Train { common, model } => {
            let cfg = common.resolve()?;
            let kind = single_algo(&cfg)?;
            let dest = model.unwrap_or_else(|| cfg.out_dir.join(format!("{kind}_model.json")));
            let s = experiment::cmd_train(&cfg, kind, &dest)?;
            println!("train {} / test {}", s.train_size, s.test_size);
            println!("trained {} in {:.2?}", kind.title(), s.elapsed);
            println!("artifact written to {}", dest.display());
        }
        Command::Evaluate { common, model, held_out } => {
            let cfg = common.resolve()?;
            let target = if held_out { EvalTarget::HeldOut } else { EvalTarget::All };
            let eval =
                experiment::cmd_evaluate(&model, &cfg.data_path, target, cfg.schema, cfg.zero_division, &cfg.out_dir)?;
            print!("{}", eval.report.render_text());
        }
        Command::Predict { model, input, output } => {
            let n = experiment::cmd_predict(&model, &input, &output)?;
            println!("{n} rows written to {}", output.display());
        }
        Command::Experiment { common } => {
            let cfg = common.resolve()?;
            let files = experiment::cmd_experiment(&cfg)?;
            match &files.outcome {
                ExperimentOutcome::Holdout { comparison, .. } => print!("{}", comparison.render_text()),
                ExperimentOutcome::CrossValidation(cv) => print!("{}", cv.render_text()),
            }
            println!("outputs written to {}", cfg.out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
