//! Train, save a versioned artifact, load it back and predict raw rows.

use std::path::Path;

use fwlog::config::ExperimentConfig;
use fwlog::dataset::class_names;
use fwlog::experiment::{prepare_holdout, train_artifact};
use fwlog::learners::LearnerKind;
use fwlog::model_store::{self, ModelArtifact};
use fwlog::synth;

/// Saves an artifact under `dir` and returns it after a load.
pub fn run_example(dir: &Path) -> fwlog::Result<ModelArtifact> {
    let ds = synth::firewall_log(1500, 15);
    let cfg = ExperimentConfig::default();
    let data = prepare_holdout(&ds, &cfg)?;
    let artifact = train_artifact(LearnerKind::Lr, &cfg, &data, &ds.fingerprint()?)?;

    let path = dir.join("lr_model.json");
    model_store::save(&artifact, &path)?;
    let loaded = model_store::load(&path)?;
    assert_eq!(loaded, artifact);
    println!("saved and reloaded {} (checksum {})", path.display(), loaded.checksum()?);

    let raw = ds.subset(&[0, 1, 2, 3, 4]);
    let (pred, scores) = loaded.predict_raw(raw.matrix())?;
    for (i, p) in pred.iter().enumerate() {
        println!(
            "row {i}: true {:<10} predicted {:<10} scores {:.3?}",
            class_names()[raw.labels()[i]],
            class_names()[*p],
            scores.row(i)
        );
    }
    Ok(loaded)
}

fn main() -> fwlog::Result<()> {
    let dir = std::env::temp_dir().join("fwlog-model-roundtrip");
    std::fs::create_dir_all(&dir).map_err(|e| fwlog::Error::Data(e.to_string()))?;
    run_example(&dir).map(|_| ())
}
