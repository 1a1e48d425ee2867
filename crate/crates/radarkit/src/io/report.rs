//! Detection, ground-truth and evaluation report files.
//!
//! Detections and ground truth are JSON maps keyed by scan file name, each
//! holding a list of boxes. The evaluation report serializes
//! [`EvalReport`] directly; PR curves can also be
//! exported as `class,recall,precision` CSV rows for plotting.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::detect::LabeledBox;
use crate::error::{Error, Result};
use crate::eval::{EvalReport, GtBox};

pub type DetectionsFile = BTreeMap<String, Vec<LabeledBox>>;
pub type GroundTruthFile = BTreeMap<String, Vec<GtBox>>;

pub fn save_detections(map: &DetectionsFile, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(map)?)?;
    Ok(())
}

pub fn load_detections(path: &Path) -> Result<DetectionsFile> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::format(path.display().to_string(), format!("bad detections: {e}")))
}

pub fn save_ground_truth(map: &GroundTruthFile, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(map)?)?;
    Ok(())
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruthFile> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::format(path.display().to_string(), format!("bad ground truth: {e}")))
}

pub fn save_report(report: &EvalReport, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(report)?)?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<EvalReport> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::format(path.display().to_string(), format!("bad report: {e}")))
}

/// Write `class,recall,precision` rows for every PR curve in the report.
pub fn save_pr_csv(report: &EvalReport, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "class,recall,precision")?;
    for (class, eval) in &report.per_class {
        for point in &eval.pr_curve {
            writeln!(file, "{class},{},{}", point.recall, point.precision)?;
        }
    }
    Ok(())
}

/// Pair detections with ground truth by file key. Keys present on only one
/// side contribute empty lists on the other, so missed scenes still count.
pub fn join_by_key(
    dets: &DetectionsFile,
    gts: &GroundTruthFile,
) -> Vec<(Vec<LabeledBox>, Vec<GtBox>)> {
    let mut keys: Vec<&String> = dets.keys().chain(gts.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|k| {
            (
                dets.get(k).cloned().unwrap_or_default(),
                gts.get(k).cloned().unwrap_or_default(),
            )
        })
        .collect()
}
