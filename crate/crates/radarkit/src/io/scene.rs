//! Scene description files for the simulator: a sensor block, the link
//! budget and a list of point scatterers.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SensorConfig;
use crate::sim::{Scatterer, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub sensor: SensorConfig,
    #[serde(default)]
    pub sim: SimConfig,
    pub scatterers: Vec<Scatterer>,
}

impl SceneFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let scene: SceneFile = serde_json::from_str(&text)
            .map_err(|e| Error::format(path.display().to_string(), format!("bad scene: {e}")))?;
        scene.sensor.validate()?;
        scene.sim.validate()?;
        Ok(scene)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SPEED_OF_LIGHT;

    #[test]
    fn scene_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        let scene = SceneFile {
            sensor: SensorConfig::from_bandwidth(SPEED_OF_LIGHT / (2.0 * 0.05), 2.0, 0.5, 400, 121)
                .unwrap(),
            sim: SimConfig::default(),
            scatterers: vec![
                Scatterer::new(-2.0, 8.0, 10.0, Some("trolley")),
                Scatterer::new(3.0, 11.0, 4.0, Some("cone")),
            ],
        };
        scene.save(&path).unwrap();
        assert_eq!(SceneFile::load(&path).unwrap(), scene);
    }

    #[test]
    fn invalid_sensor_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        fs::write(
            &path,
            r#"{"sensor": {"bandwidth_hz": -1.0, "azimuth_beamwidth_deg": 2.0,
                 "azimuth_step_deg": 0.5, "range_bins": 10, "azimuth_bins": 10,
                 "max_range_m": 1.0}, "scatterers": []}"#,
        )
        .unwrap();
        assert!(SceneFile::load(&path).is_err());
    }
}
