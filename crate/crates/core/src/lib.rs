//! Firewall log action classification.
//!
//! Reads the per-session firewall log export (11 numeric traffic features plus
//! an `Action` column), standardizes it, trains one of four classifiers
//! (random forest, multinomial logistic regression, k-nearest neighbours,
//! linear one-vs-rest SVM) and produces classification reports, confusion
//! matrices and macro one-vs-rest ROC AUC.
//!
//! The typical flow:
//!
//! ```no_run
//! use fwlog::dataset::{parse_csv_path, SchemaPolicy};
//! use fwlog::preprocess::{shuffle_split, ScalerParams, SplitSpec};
//! use fwlog::learners::{fit, LearnerConfig};
//! use fwlog::metrics::{ClassificationReport, ZeroDivision};
//!
//! let (ds, _report) = parse_csv_path("log2.csv", SchemaPolicy::HeaderMapped)?;
//! let (train, test) = shuffle_split(&ds, &SplitSpec::new(0.7, 42))?;
//! let scaler = ScalerParams::fit(train.matrix())?;
//! let x_train = scaler.transform(train.matrix())?;
//! let x_test = scaler.transform(test.matrix())?;
//! let model = fit(&LearnerConfig::default_rf(), &x_train, train.labels(), 42)?;
//! let pred = model.predict(&x_test)?;
//! let scores = model.predict_scores(&x_test)?;
//! let report = ClassificationReport::build(test.labels(), &pred, Some(&scores), ZeroDivision::One)?;
//! println!("{}", report.render_text());
//! # Ok::<(), fwlog::Error>(())
//! ```

pub mod config;
pub mod dataset;
mod error;
pub mod experiment;
pub mod learners;
pub mod matrix;
pub mod metrics;
pub mod model_store;
pub mod preprocess;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::Matrix;

/// Number of action classes.
pub const N_CLASSES: usize = 4;

/// Number of numeric predictors in a firewall log row.
pub const N_FEATURES: usize = 11;
