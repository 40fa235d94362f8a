//! Versioned JSON artifacts holding the whole inference pipeline:
//! scaler, label map and fitted model.
//!
//! The file is a single JSON object whose last field, `checksum`, is the
//! SHA-256 of the compact JSON encoding of every other field except
//! `created_at`. Numbers are written in shortest round-trip form, so a loaded
//! artifact is bit-identical to the saved one.

use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::class_names;
use crate::learners::{LearnerConfig, LearnerKind, Model};
use crate::preprocess::{ScalerParams, ScalingMode};
use crate::{Error, Matrix, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub config: LearnerConfig,
    /// SHA-256 of the canonical CSV rendering of the full input dataset.
    pub dataset_fingerprint: String,
    /// SHA-256 over the training row indices, identical for learners that
    /// shared a partition.
    pub split_fingerprint: String,
    pub train_fraction: f64,
    pub stratified: bool,
    pub scaling: ScalingMode,
    pub train_size: u64,
    pub test_size: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub created_at: DateTime<Utc>,
    pub learner_kind: LearnerKind,
    pub scaler: ScalerParams,
    pub label_map: Vec<String>,
    pub params: Model,
    pub training_meta: TrainingMeta,
}

/// Fields covered by the checksum, in file order.
#[derive(Serialize)]
struct Body<'a> {
    format_version: u32,
    learner_kind: LearnerKind,
    scaler: &'a ScalerParams,
    label_map: &'a [String],
    params: &'a Model,
    training_meta: &'a TrainingMeta,
}

#[derive(Serialize)]
struct FileRef<'a> {
    format_version: u32,
    created_at: &'a DateTime<Utc>,
    learner_kind: LearnerKind,
    scaler: &'a ScalerParams,
    label_map: &'a [String],
    params: &'a Model,
    training_meta: &'a TrainingMeta,
    checksum: String,
}

#[derive(Deserialize)]
struct FileOwned {
    format_version: u32,
    created_at: DateTime<Utc>,
    learner_kind: LearnerKind,
    scaler: ScalerParams,
    label_map: Vec<String>,
    params: Model,
    training_meta: TrainingMeta,
    checksum: String,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

pub fn standard_label_map() -> Vec<String> {
    class_names().iter().map(|s| s.to_string()).collect()
}

impl ModelArtifact {
    pub fn new(scaler: ScalerParams, params: Model, training_meta: TrainingMeta) -> Self {
        ModelArtifact {
            format_version: FORMAT_VERSION,
            // Whole seconds so the timestamp survives a round trip unchanged.
            created_at: Utc::now().trunc_subsecs(0),
            learner_kind: params.kind(),
            scaler,
            label_map: standard_label_map(),
            params,
            training_meta,
        }
    }

    pub fn checksum(&self) -> Result<String> {
        let body = Body {
            format_version: self.format_version,
            learner_kind: self.learner_kind,
            scaler: &self.scaler,
            label_map: &self.label_map,
            params: &self.params,
            training_meta: &self.training_meta,
        };
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(&body)?)))
    }

    /// The artifact as written by [`save`].
    pub fn to_json(&self) -> Result<String> {
        let file = FileRef {
            format_version: self.format_version,
            created_at: &self.created_at,
            learner_kind: self.learner_kind,
            scaler: &self.scaler,
            label_map: &self.label_map,
            params: &self.params,
            training_meta: &self.training_meta,
            checksum: self.checksum()?,
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and fully validates an artifact document.
    pub fn from_json(text: &str) -> Result<Self> {
        let probe: VersionProbe =
            serde_json::from_str(text).map_err(|e| Error::Corrupt(format!("unreadable artifact: {e}")))?;
        if probe.format_version != FORMAT_VERSION {
            return Err(Error::Version(probe.format_version));
        }
        let file: FileOwned =
            serde_json::from_str(text).map_err(|e| Error::Corrupt(format!("unreadable artifact: {e}")))?;
        let artifact = ModelArtifact {
            format_version: file.format_version,
            created_at: file.created_at,
            learner_kind: file.learner_kind,
            scaler: file.scaler,
            label_map: file.label_map,
            params: file.params,
            training_meta: file.training_meta,
        };
        let expected = artifact.checksum()?;
        if expected != file.checksum {
            return Err(Error::Corrupt(format!(
                "checksum mismatch: stored {}, computed {expected}",
                file.checksum
            )));
        }
        artifact.validate()?;
        Ok(artifact)
    }

    /// Label map, payload shape and scaler invariants.
    pub fn validate(&self) -> Result<()> {
        if self.label_map != standard_label_map() {
            return Err(Error::LabelMap(self.label_map.clone()));
        }
        if self.params.kind() != self.learner_kind {
            return Err(Error::Corrupt(format!(
                "learner_kind {} but payload is {}",
                self.learner_kind,
                self.params.kind()
            )));
        }
        if self.training_meta.config.kind() != self.learner_kind {
            return Err(Error::Corrupt("training config does not match learner_kind".into()));
        }
        self.scaler.validate().map_err(|e| Error::Corrupt(e.to_string()))?;
        self.params.validate().map_err(|e| Error::Corrupt(e.to_string()))?;
        if self.params.n_features() != self.scaler.n_features() {
            return Err(Error::Corrupt(format!(
                "model expects {} features, scaler has {}",
                self.params.n_features(),
                self.scaler.n_features()
            )));
        }
        Ok(())
    }

    /// Standardizes raw feature rows with the stored scaler, then scores them.
    pub fn predict_raw(&self, raw: &Matrix) -> Result<(Vec<usize>, Matrix)> {
        let x = self.scaler.transform(raw)?;
        let scores = self.params.predict_scores(&x)?;
        let pred = scores.iter_rows().map(crate::learners::argmax).collect();
        Ok((pred, scores))
    }
}

/// Writes `artifact` atomically (temporary file in the same directory, then rename).
pub fn save(artifact: &ModelArtifact, destination: impl AsRef<Path>) -> Result<()> {
    let dest = destination.as_ref();
    let text = artifact.to_json()?;
    let dir = match dest.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let file_name = dest
        .file_name()
        .ok_or_else(|| Error::Data(format!("{} is not a file path", dest.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", file_name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, dest)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(dest, e)
    })
}

pub fn load(source: impl AsRef<Path>) -> Result<ModelArtifact> {
    let path = source.as_ref();
    let text = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(text).map_err(|_| Error::Corrupt("artifact is not UTF-8".into()))?;
    ModelArtifact::from_json(&text)
}
