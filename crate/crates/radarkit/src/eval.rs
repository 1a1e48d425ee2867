//! Detection and classification metrics: IoU, greedy matching,
//! precision-recall curves, PASCAL-VOC-style average precision, confusion
//! matrices and the MSAD image-similarity measure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::detect::{BoxRect, LabeledBox};
use crate::error::{Error, Result};
use crate::geometry::CartesianImage;

/// Ground-truth annotation: a box with a class but no score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtBox {
    pub class: String,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl GtBox {
    pub fn rect(&self) -> BoxRect {
        BoxRect::new(self.x, self.y, self.width, self.height)
    }
}

/// Intersection over union of two boxes, treating coordinates as continuous
/// extents (no +1 pixel convention). Clamped to [0, 1]: rounding in the
/// edge arithmetic can otherwise push identical boxes a few ulp past 1.
pub fn iou(a: &BoxRect, b: &BoxRect) -> f64 {
    let ix = (a.x + a.width).min(b.x + b.width) - a.x.max(b.x);
    let iy = (a.y + a.height).min(b.y + b.height) - a.y.max(b.y);
    if ix <= 0.0 || iy <= 0.0 {
        return 0.0;
    }
    let inter = ix * iy;
    let union = a.width * a.height + b.width * b.height - inter;
    (inter / union).min(1.0)
}

/// Outcome of greedily matching detections against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// True/false positive flag per detection, in input order.
    pub det_is_tp: Vec<bool>,
    /// Matched flag per ground-truth box.
    pub gt_matched: Vec<bool>,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

/// Greedy matching in descending score order (ties keep input order): each
/// detection takes the highest-IoU unmatched same-class ground truth at or
/// above the threshold. A ground truth matches at most once, so duplicate
/// detections of one object count a single TP and the rest FP.
pub fn match_detections(dets: &[LabeledBox], gts: &[GtBox], iou_thresh: f64) -> MatchResult {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.partial_cmp(&dets[a].score).unwrap());

    let mut det_is_tp = vec![false; dets.len()];
    let mut gt_matched = vec![false; gts.len()];
    for &d in &order {
        let det = &dets[d];
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if gt_matched[g] || gt.class != det.class {
                continue;
            }
            let overlap = iou(&det.rect(), &gt.rect());
            if overlap >= iou_thresh && best.is_none_or(|(_, b)| overlap > b) {
                best = Some((g, overlap));
            }
        }
        if let Some((g, _)) = best {
            gt_matched[g] = true;
            det_is_tp[d] = true;
        }
    }
    let tp = det_is_tp.iter().filter(|t| **t).count();
    MatchResult {
        fp: dets.len() - tp,
        fn_: gts.len() - tp,
        det_is_tp,
        gt_matched,
        tp,
    }
}

/// Which AP integral to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApVariant {
    /// Area under the monotone precision envelope over all recall points.
    AllPoints,
    /// Mean interpolated precision at recall 0, 0.1, ..., 1.0.
    ElevenPoint,
}

/// One point of a precision-recall curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

/// Precision-recall points from score-ranked (score, is_tp) pairs.
fn pr_points(mut ranked: Vec<(f64, bool)>, n_gt: usize) -> Vec<PrPoint> {
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut out = Vec::with_capacity(ranked.len());
    for (_, is_tp) in ranked {
        if is_tp {
            tp += 1;
        } else {
            fp += 1;
        }
        out.push(PrPoint {
            recall: tp as f64 / n_gt as f64,
            precision: tp as f64 / (tp + fp) as f64,
        });
    }
    out
}

fn ap_from_pr(points: &[PrPoint], variant: ApVariant) -> f64 {
    match variant {
        ApVariant::AllPoints => {
            // Monotone envelope: max precision at recall >= r.
            let mut envelope = vec![0.0; points.len()];
            let mut running = 0.0f64;
            for i in (0..points.len()).rev() {
                running = running.max(points[i].precision);
                envelope[i] = running;
            }
            let mut ap = 0.0;
            let mut prev_recall = 0.0;
            for (p, env) in points.iter().zip(envelope.iter()) {
                ap += (p.recall - prev_recall) * env;
                prev_recall = p.recall;
            }
            ap
        }
        ApVariant::ElevenPoint => {
            let mut sum = 0.0;
            for i in 0..=10 {
                let r = i as f64 / 10.0;
                let p = points
                    .iter()
                    .filter(|pt| pt.recall >= r - 1e-12)
                    .map(|pt| pt.precision)
                    .fold(0.0f64, f64::max);
                sum += p;
            }
            sum / 11.0
        }
    }
}

/// Average precision for one class on one image pair of lists.
///
/// Fails when there is no ground truth; callers exclude such classes before
/// averaging.
pub fn average_precision(
    dets: &[LabeledBox],
    gts: &[GtBox],
    iou_thresh: f64,
    variant: ApVariant,
) -> Result<f64> {
    if gts.is_empty() {
        return Err(Error::EmptySelection(
            "average precision is undefined without ground truth".into(),
        ));
    }
    let matched = match_detections(dets, gts, iou_thresh);
    let ranked: Vec<(f64, bool)> = dets
        .iter()
        .zip(matched.det_is_tp.iter())
        .map(|(d, t)| (d.score, *t))
        .collect();
    Ok(ap_from_pr(&pr_points(ranked, gts.len()), variant))
}

/// Unweighted mean over classes that have ground truth (`None` entries are
/// the "N/A" classes and are excluded). Returns `None` when nothing applies.
pub fn mean_ap(per_class_ap: &[Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = per_class_ap.iter().flatten().copied().collect();
    if present.is_empty() {
        None
    } else {
        Some(present.iter().sum::<f64>() / present.len() as f64)
    }
}

/// Per-class slice of an evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEval {
    pub ap: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub n_gt: usize,
    pub pr_curve: Vec<PrPoint>,
}

/// Dataset-level evaluation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_class: BTreeMap<String, ClassEval>,
    pub map: f64,
    pub iou_threshold: f64,
    pub variant: ApVariant,
}

/// Evaluate detections over a set of images. Matching runs per image and
/// per class; the (score, TP) pairs are then pooled across images for one
/// ranked PR sweep per class, VOC style.
pub fn evaluate_dataset(
    images: &[(Vec<LabeledBox>, Vec<GtBox>)],
    iou_thresh: f64,
    variant: ApVariant,
) -> Result<EvalReport> {
    let mut classes: Vec<String> = Vec::new();
    for (dets, gts) in images {
        for d in dets {
            if !classes.contains(&d.class) {
                classes.push(d.class.clone());
            }
        }
        for g in gts {
            if !classes.contains(&g.class) {
                classes.push(g.class.clone());
            }
        }
    }
    classes.sort();

    let mut per_class = BTreeMap::new();
    let mut aps: Vec<Option<f64>> = Vec::new();
    for class in &classes {
        let mut ranked: Vec<(f64, bool)> = Vec::new();
        let mut n_gt = 0usize;
        let mut tp = 0usize;
        for (dets, gts) in images {
            let class_dets: Vec<LabeledBox> =
                dets.iter().filter(|d| &d.class == class).cloned().collect();
            let class_gts: Vec<GtBox> = gts.iter().filter(|g| &g.class == class).cloned().collect();
            n_gt += class_gts.len();
            let matched = match_detections(&class_dets, &class_gts, iou_thresh);
            tp += matched.tp;
            ranked.extend(
                class_dets
                    .iter()
                    .zip(matched.det_is_tp.iter())
                    .map(|(d, t)| (d.score, *t)),
            );
        }
        if n_gt == 0 {
            aps.push(None); // detected-only class: N/A for mAP
            continue;
        }
        let points = pr_points(ranked.clone(), n_gt);
        let ap = ap_from_pr(&points, variant);
        aps.push(Some(ap));
        per_class.insert(
            class.clone(),
            ClassEval {
                ap,
                tp,
                fp: ranked.len() - tp,
                fn_: n_gt - tp,
                n_gt,
                pr_curve: points,
            },
        );
    }

    let map = mean_ap(&aps).ok_or_else(|| {
        Error::EmptySelection("no class has ground truth; mAP is undefined".into())
    })?;
    Ok(EvalReport {
        per_class,
        map,
        iou_threshold: iou_thresh,
        variant,
    })
}

/// Confusion counts for an n-class labeling task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// `counts[i][j]` = number of samples with true class i predicted as j.
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Fraction of correct predictions: trace over total.
    pub fn accuracy(&self) -> f64 {
        let trace: usize = (0..self.counts.len()).map(|i| self.counts[i][i]).sum();
        trace as f64 / self.total() as f64
    }

    /// Recall of one true class (diagonal over row sum).
    pub fn recall(&self, class: usize) -> f64 {
        let row: usize = self.counts[class].iter().sum();
        if row == 0 {
            0.0
        } else {
            self.counts[class][class] as f64 / row as f64
        }
    }
}

/// Build the confusion matrix for paired label lists.
pub fn confusion_matrix(
    true_labels: &[usize],
    pred_labels: &[usize],
    n_classes: usize,
) -> Result<ConfusionMatrix> {
    if true_labels.len() != pred_labels.len() {
        return Err(Error::invalid(format!(
            "label lists differ in length: {} vs {}",
            true_labels.len(),
            pred_labels.len()
        )));
    }
    if true_labels.is_empty() {
        return Err(Error::EmptySelection("no labels to score".into()));
    }
    let mut counts = vec![vec![0usize; n_classes]; n_classes];
    for (&t, &p) in true_labels.iter().zip(pred_labels.iter()) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::invalid(format!(
                "label out of range: true {t}, pred {p}, n_classes {n_classes}"
            )));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// Rectangular pixel window for localized comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelWindow {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

/// Mean absolute per-pixel difference between two congruent images, over an
/// optional window.
pub fn msad(a: &CartesianImage, b: &CartesianImage, window: Option<PixelWindow>) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::invalid(format!(
            "images differ in size: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    match window {
        None => msad_slices(a.data(), b.data()),
        Some(w) => {
            if w.width == 0
                || w.height == 0
                || w.x + w.width > a.width()
                || w.y + w.height > a.height()
            {
                return Err(Error::invalid("window does not fit inside the images"));
            }
            let mut sum = 0.0;
            for row in w.y..w.y + w.height {
                for col in w.x..w.x + w.width {
                    sum += (a.get(col, row) - b.get(col, row)).abs();
                }
            }
            Ok(sum / (w.width * w.height) as f64)
        }
    }
}

/// MSAD over two raw grids of equal length.
pub fn msad_slices(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "grids differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::EmptySelection("empty grids".into()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}
