use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DatasetError, Sample, SampleKind};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub seed: u64,
    pub kind: SampleKind,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub samples: Vec<ManifestEntry>,
}

fn file_error(path: &Path, message: impl ToString) -> DatasetError {
    DatasetError::File {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

/// Write one document per sample plus `manifest.json` into `dir`, creating
/// it if needed.
pub fn write_dataset(dir: &Path, samples: &[Sample]) -> Result<Manifest, DatasetError> {
    fs::create_dir_all(dir).map_err(|e| file_error(dir, e))?;
    let mut manifest = Manifest::default();
    for sample in samples {
        let kind = serde_json::to_value(sample.kind).expect("kind serializes");
        let file = format!("{}_{:06}.json", kind.as_str().expect("kind is a string"), sample.seed);
        let path = dir.join(&file);
        let text = serde_json::to_string_pretty(sample).expect("sample serializes");
        fs::write(&path, text + "\n").map_err(|e| file_error(&path, e))?;
        manifest.samples.push(ManifestEntry {
            seed: sample.seed,
            kind: sample.kind,
            file,
        });
    }
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| file_error(&path, e))?;
    Ok(manifest)
}

/// Read the samples listed in `dir/manifest.json`, in manifest order.
pub fn read_dataset(dir: &Path) -> Result<Vec<Sample>, DatasetError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| file_error(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| file_error(&path, e))?;
    manifest
        .samples
        .iter()
        .map(|entry| {
            let path = dir.join(&entry.file);
            let text = fs::read_to_string(&path).map_err(|e| file_error(&path, e))?;
            serde_json::from_str(&text).map_err(|e| file_error(&path, e))
        })
        .collect()
}
