//! Pluggable patch classifier and the nearest-centroid baseline.
//!
//! The pipeline only needs "patch in, per-class scores out", so the neural
//! network the detections are normally fed to can be swapped in behind the
//! same trait by another binding.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::CartesianImage;

/// Scores one fixed-size patch against a known class list.
pub trait Classifier: Send + Sync {
    /// Class labels, aligned with the score vector.
    fn classes(&self) -> &[String];

    /// Finite scores per class for one patch. Panics if the patch size does
    /// not match what the classifier was built for.
    fn score(&self, patch: &CartesianImage) -> Vec<f64>;

    /// Best class and its score.
    fn classify(&self, patch: &CartesianImage) -> (String, f64) {
        let scores = self.score(patch);
        let mut best = 0usize;
        for (i, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = i;
            }
        }
        (self.classes()[best].clone(), scores[best])
    }
}

/// Template matcher: per-class mean patches, scored by a softmax over
/// negative Euclidean distances. Scores land in [0, 1] and sum to one.
#[derive(Debug, Clone)]
pub struct NearestCentroidClassifier {
    classes: Vec<String>,
    centroids: Vec<Vec<f64>>,
    patch_len: usize,
}

impl NearestCentroidClassifier {
    /// Average the training patches per class. Every class needs at least
    /// one patch and all patches must share one size.
    pub fn train(patches: &[(CartesianImage, String)]) -> Result<Self> {
        if patches.is_empty() {
            return Err(Error::invalid("classifier training needs >= 1 patch"));
        }
        let patch_len = patches[0].0.data().len();
        let mut sums: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
        for (img, class) in patches {
            if img.data().len() != patch_len {
                return Err(Error::invalid(format!(
                    "training patch for '{class}' has {} samples, expected {patch_len}",
                    img.data().len()
                )));
            }
            let entry = sums
                .entry(class.as_str())
                .or_insert_with(|| (vec![0.0; patch_len], 0));
            for (acc, v) in entry.0.iter_mut().zip(img.data()) {
                *acc += v;
            }
            entry.1 += 1;
        }
        let mut classes = Vec::new();
        let mut centroids = Vec::new();
        for (class, (sum, count)) in sums {
            classes.push(class.to_string());
            centroids.push(sum.into_iter().map(|s| s / count as f64).collect());
        }
        Ok(NearestCentroidClassifier {
            classes,
            centroids,
            patch_len,
        })
    }
}

impl Classifier for NearestCentroidClassifier {
    fn classes(&self) -> &[String] {
        &self.classes
    }

    fn score(&self, patch: &CartesianImage) -> Vec<f64> {
        assert_eq!(
            patch.data().len(),
            self.patch_len,
            "patch size does not match the trained templates"
        );
        let neg_dist: Vec<f64> = self
            .centroids
            .iter()
            .map(|c| {
                -c.iter()
                    .zip(patch.data())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let max = neg_dist.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = neg_dist.iter().map(|d| (d - max).exp()).collect();
        let total: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / total).collect()
    }
}

/// Trivial single-class hook for detection-only runs.
#[derive(Debug, Clone)]
pub struct SingleClassClassifier {
    classes: [String; 1],
}

impl SingleClassClassifier {
    pub fn new(class: impl Into<String>) -> Self {
        SingleClassClassifier {
            classes: [class.into()],
        }
    }
}

impl Classifier for SingleClassClassifier {
    fn classes(&self) -> &[String] {
        &self.classes
    }

    fn score(&self, _patch: &CartesianImage) -> Vec<f64> {
        vec![1.0]
    }
}
