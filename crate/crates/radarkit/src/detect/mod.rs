//! Two-stage detection: CA-CFAR proposes cells, DBSCAN groups them into
//! clusters, each cluster becomes a fixed-size box whose patch is handed to
//! a classifier hook.

pub mod boxes;
pub mod cfar;
pub mod classifier;
pub mod dbscan;

pub use boxes::{clusters_to_boxes, crop_resize, BoxRect, LabeledBox};
pub use cfar::{ca_cfar, CfarMode, CfarParams, DetectionMask};
pub use classifier::{Classifier, NearestCentroidClassifier, SingleClassClassifier};
pub use dbscan::{clusters_from_labels, dbscan, Cluster, DbscanParams};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{polar_to_cartesian, CartesianImage, InterpMethod, PolarImage};

/// Everything the detection pipeline needs besides the scan and classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub cfar: CfarParams,
    pub dbscan: DbscanParams,
    /// Side of the proposal boxes in pixels.
    pub box_side_px: usize,
    /// Side of the classifier input patches in pixels.
    pub patch_side_px: usize,
    /// Grid spacing for the Cartesian render; defaults to the scan's range
    /// resolution when absent.
    pub meters_per_pixel: Option<f64>,
    /// Interpolation for the Cartesian render.
    pub interp: InterpMethod,
    /// Value for pixels outside the scanned sector.
    pub fill_db: f64,
}

impl PipelineParams {
    /// Reference parameters: CFAR 500/30/0.22, DBSCAN 0.3 m with 40 points,
    /// 275 px boxes resized to 88 px patches.
    pub fn reference_defaults() -> Self {
        PipelineParams {
            cfar: CfarParams::reference_defaults(),
            dbscan: DbscanParams::reference_defaults(),
            box_side_px: 275,
            patch_side_px: 88,
            meters_per_pixel: None,
            interp: InterpMethod::Bilinear,
            fill_db: -100.0,
        }
    }
}

/// Detection result with the intermediates tests and tooling care about.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub boxes: Vec<LabeledBox>,
    pub clusters: Vec<Cluster>,
    pub cartesian: CartesianImage,
}

/// Run the full front end on one polar scan.
pub fn detect_pipeline(
    polar: &PolarImage,
    params: &PipelineParams,
    classifier: &dyn Classifier,
) -> Result<PipelineOutput> {
    let mask = ca_cfar(polar, &params.cfar)?;
    let mpp = params.meters_per_pixel.unwrap_or(polar.range_resolution_m);
    let cartesian = polar_to_cartesian(polar, mpp, params.interp, params.fill_db)?;

    let points = mask.points(polar);
    let labels = dbscan(&points, params.dbscan.eps_m, params.dbscan.min_pts)?;
    let clusters = clusters_from_labels(&points, &labels);

    let rects = clusters_to_boxes(&clusters, params.box_side_px, &cartesian);
    let mut labeled = Vec::with_capacity(rects.len());
    for rect in &rects {
        let patch = crop_resize(&cartesian, rect, params.patch_side_px, params.fill_db)?;
        let (class, score) = classifier.classify(&patch);
        labeled.push(LabeledBox {
            class,
            score,
            x: rect.x,
            y: rect.y,
            width: rect.width,
            height: rect.height,
        });
    }

    Ok(PipelineOutput {
        boxes: labeled,
        clusters,
        cartesian,
    })
}
