//! File formats: binary scans with JSON sidecars, dataset manifests, scene
//! descriptions, configuration, evaluation artifacts and PNG export.

pub mod config;
pub mod export;
pub mod manifest;
pub mod report;
pub mod scan;
pub mod scene;

pub use config::ToolConfig;
pub use export::export_png16;
pub use manifest::{DatasetManifest, ManifestRecord, MANIFEST_SCHEMA_VERSION};
pub use report::{
    join_by_key, load_detections, load_ground_truth, load_report, save_detections,
    save_ground_truth, save_pr_csv, save_report, DetectionsFile, GroundTruthFile,
};
pub use scan::{
    load_any_scan, load_cartesian_scan, load_scan, save_cartesian_scan, save_scan, sidecar_path,
    Scan,
};
pub use scene::SceneFile;
