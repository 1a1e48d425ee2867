//! Toolkit configuration: flat typed keys mirroring every operation
//! default, loadable from a TOML file. Command-line flags override file
//! values, which override the built-in defaults.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detect::{CfarMode, CfarParams, DbscanParams, PipelineParams};
use crate::error::{Error, Result};
use crate::eval::ApVariant;
use crate::geometry::InterpMethod;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    /// Cartesian grid spacing; `None` derives it from the scan's range
    /// resolution.
    pub meters_per_pixel: Option<f64>,
    /// Value for pixels outside the scanned sector and vacated regions.
    pub fill_db: f64,
    /// Interpolation for polar/Cartesian remapping.
    pub interp: InterpMethod,
    /// Segmentation threshold in dB; `None` estimates it per image.
    pub segment_threshold_db: Option<f64>,

    pub cfar_train_cells: usize,
    pub cfar_guard_cells: usize,
    pub cfar_rate: f64,
    pub cfar_mode: CfarMode,

    pub dbscan_eps_m: f64,
    pub dbscan_min_pts: usize,

    pub box_side_px: usize,
    pub patch_side_px: usize,

    pub iou_threshold: f64,
    pub ap_variant: ApVariant,

    pub speckle_sigma_sq_min: f64,
    pub speckle_sigma_sq_max: f64,
    pub speckle_sigma_uniform: bool,
    pub background_shift_levels_db: Vec<f64>,
    pub max_translation_px: usize,
    pub mirror: bool,
    pub replication: usize,

    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            meters_per_pixel: None,
            fill_db: -100.0,
            interp: InterpMethod::Bilinear,
            segment_threshold_db: None,
            cfar_train_cells: 500,
            cfar_guard_cells: 30,
            cfar_rate: 0.22,
            cfar_mode: CfarMode::Scale,
            dbscan_eps_m: 0.3,
            dbscan_min_pts: 40,
            box_side_px: 275,
            patch_side_px: 88,
            iou_threshold: 0.5,
            ap_variant: ApVariant::AllPoints,
            speckle_sigma_sq_min: 0.01,
            speckle_sigma_sq_max: 0.15,
            speckle_sigma_uniform: false,
            background_shift_levels_db: vec![-6.0, -3.0, 3.0, 6.0],
            max_translation_px: 8,
            mirror: true,
            replication: 41,
            seed: 0,
            jobs: 0,
        }
    }
}

impl ToolConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| Error::format(path.display().to_string(), format!("bad config: {e}")))
    }

    pub fn pipeline_params(&self) -> PipelineParams {
        PipelineParams {
            cfar: CfarParams {
                train_cells: self.cfar_train_cells,
                guard_cells: self.cfar_guard_cells,
                rate: self.cfar_rate,
                mode: self.cfar_mode,
            },
            dbscan: DbscanParams {
                eps_m: self.dbscan_eps_m,
                min_pts: self.dbscan_min_pts,
            },
            box_side_px: self.box_side_px,
            patch_side_px: self.patch_side_px,
            meters_per_pixel: self.meters_per_pixel,
            interp: self.interp,
            fill_db: self.fill_db,
        }
    }

    pub fn augmentation_plan(&self) -> crate::augment::AugmentationPlan {
        crate::augment::AugmentationPlan {
            target_ranges_m: (2..=15).map(|r| r as f64).collect(),
            speckle_sigma_sq_min: self.speckle_sigma_sq_min,
            speckle_sigma_sq_max: self.speckle_sigma_sq_max,
            speckle_sigma_uniform: self.speckle_sigma_uniform,
            background_shift_levels_db: self.background_shift_levels_db.clone(),
            max_translation_px: self.max_translation_px,
            mirror: self.mirror,
            fill_db: self.fill_db,
            seed: self.seed,
            replication: self.replication,
        }
    }
}
