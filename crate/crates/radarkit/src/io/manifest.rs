//! Dataset manifests: the record list tying scan files to class, range,
//! rotation and receiver metadata plus optional box annotations.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::augment::Recipe;
use crate::error::{Error, Result};
use crate::eval::GtBox;
use crate::geometry::SensorConfig;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// One dataset record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    /// Scan payload path, relative to the manifest file.
    pub scan: String,
    pub class: String,
    pub range_m: f64,
    #[serde(default)]
    pub rotation_deg: f64,
    #[serde(default)]
    pub receiver: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boxes: Vec<GtBox>,
    /// Present on records produced by the augmentation pipeline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augmentation: Option<Recipe>,
}

/// A dataset: sensor description plus the record list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub sensor: SensorConfig,
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    pub fn new(sensor: SensorConfig) -> Self {
        DatasetManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            sensor,
            records: Vec::new(),
        }
    }

    /// Parse and validate: the schema version must be known, the sensor
    /// consistent and every referenced scan present on disk.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let manifest: DatasetManifest = serde_json::from_str(&text)
            .map_err(|e| Error::format(path.display().to_string(), format!("bad manifest: {e}")))?;
        manifest.validate(path.parent().unwrap_or(Path::new(".")))?;
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn validate(&self, base_dir: &Path) -> Result<()> {
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::format(
                "manifest",
                format!(
                    "unrecognized schema version {} (expected {MANIFEST_SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        self.sensor.validate()?;
        for record in &self.records {
            let scan = base_dir.join(&record.scan);
            if !scan.exists() {
                return Err(Error::format(
                    scan.display().to_string(),
                    "referenced scan file does not exist",
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SPEED_OF_LIGHT;

    fn sensor() -> SensorConfig {
        SensorConfig::from_bandwidth(SPEED_OF_LIGHT / (2.0 * 0.05), 2.0, 1.0, 64, 32).unwrap()
    }

    #[test]
    fn round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let scan_path = dir.path().join("a.bin");
        let img = crate::geometry::PolarImage::filled(-40.0, 32, 64, 0.05, -15.5, 1.0).unwrap();
        crate::io::scan::save_scan(&img, &scan_path).unwrap();

        let mut manifest = DatasetManifest::new(sensor());
        manifest.records.push(ManifestRecord {
            scan: "a.bin".into(),
            class: "trolley".into(),
            range_m: 3.8,
            rotation_deg: 40.0,
            receiver: "rx1".into(),
            boxes: vec![],
            augmentation: None,
        });
        let path = dir.path().join("manifest.json");
        manifest.save(&path).unwrap();
        let back = DatasetManifest::load(&path).unwrap();
        assert_eq!(back, manifest);
    }

    #[test]
    fn missing_scan_fails_validation() {
        let dir = tempfile::tempdir().unwrap();
        let mut manifest = DatasetManifest::new(sensor());
        manifest.records.push(ManifestRecord {
            scan: "nope.bin".into(),
            class: "cone".into(),
            range_m: 6.3,
            rotation_deg: 0.0,
            receiver: String::new(),
            boxes: vec![],
            augmentation: None,
        });
        let path = dir.path().join("manifest.json");
        manifest.save(&path).unwrap();
        assert!(DatasetManifest::load(&path).is_err());
    }

    #[test]
    fn unknown_schema_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut manifest = DatasetManifest::new(sensor());
        manifest.schema_version = 99;
        let path = dir.path().join("manifest.json");
        manifest.save(&path).unwrap();
        assert!(DatasetManifest::load(&path).is_err());
    }
}
