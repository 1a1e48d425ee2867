//! Attenuation over range: segmentation, per-class linear power models and
//! the object-only attenuation transform.
//!
//! Received object power in dB decays approximately linearly with range, so
//! each class carries an ordinary-least-squares fit of mean object power
//! against range. Shifting an object from `r_curr` to `r_new` adds
//! `(r_new - r_curr) * slope` to every object pixel while background pixels
//! keep their exact input values.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CartesianImage;

/// Binary object/background segmentation congruent with its source image.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectMask {
    data: Vec<bool>,
    width: usize,
    height: usize,
    /// Threshold that produced this mask.
    pub threshold_db: f64,
}

impl ObjectMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.data[row * self.width + col]
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    /// Number of object pixels.
    pub fn count(&self) -> usize {
        self.data.iter().filter(|b| **b).count()
    }

    pub fn matches(&self, img: &CartesianImage) -> bool {
        self.width == img.width() && self.height == img.height()
    }
}

/// Mark every pixel strictly above `threshold_db` as object.
pub fn segment_threshold(img: &CartesianImage, threshold_db: f64) -> ObjectMask {
    ObjectMask {
        data: img.data().iter().map(|v| *v > threshold_db).collect(),
        width: img.width(),
        height: img.height(),
        threshold_db,
    }
}

/// Estimate a segmentation threshold as `mean + 3*std` of the background,
/// taken from the outer 10% range annulus (pixels farthest from the sensor,
/// which are assumed object-free).
pub fn auto_threshold(img: &CartesianImage) -> f64 {
    let mut r_max = 0.0f64;
    for &(c, r) in &[
        (0, 0),
        (img.width() - 1, 0),
        (0, img.height() - 1),
        (img.width() - 1, img.height() - 1),
    ] {
        r_max = r_max.max(img.range_from_sensor(c, r));
    }
    let cutoff = 0.9 * r_max;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut n = 0usize;
    for row in 0..img.height() {
        for col in 0..img.width() {
            if img.range_from_sensor(col, row) >= cutoff {
                let v = img.get(col, row);
                sum += v;
                sum_sq += v * v;
                n += 1;
            }
        }
    }
    if n == 0 {
        // Degenerate geometry; fall back to whole-image statistics.
        sum = img.data().iter().sum();
        sum_sq = img.data().iter().map(|v| v * v).sum();
        n = img.data().len();
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    mean + 3.0 * var.sqrt()
}

/// Mean dB power over the object pixels of `mask`.
pub fn mean_object_power(img: &CartesianImage, mask: &ObjectMask) -> Result<f64> {
    if !mask.matches(img) {
        return Err(Error::invalid(format!(
            "mask {}x{} does not match image {}x{}",
            mask.width,
            mask.height,
            img.width(),
            img.height()
        )));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (v, m) in img.data().iter().zip(mask.data.iter()) {
        if *m {
            sum += v;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptySelection(
            "mask selects no object pixels".into(),
        ));
    }
    Ok(sum / n as f64)
}

/// One fitted class: mean object power (dB) as a linear function of range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationEntry {
    /// Fitted slope in dB per meter.
    pub slope_db_per_m: f64,
    /// Fitted intercept in dB (power extrapolated to range 0).
    pub intercept_db: f64,
    /// Number of (range, power) samples in the fit.
    pub n_points: usize,
    /// Root-mean-square residual of the fit in dB.
    pub rmse: f64,
}

/// Ordinary least squares of mean power (dB) against range (m).
///
/// Needs at least two samples at two distinct ranges; all-equal ranges have
/// no unique slope and fail with a singular-fit error.
pub fn fit_attenuation(samples: &[(f64, f64)]) -> Result<AttenuationEntry> {
    if samples.len() < 2 {
        return Err(Error::invalid(format!(
            "attenuation fit needs >= 2 samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mean_x = samples.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = samples.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in samples {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::SingularFit(
            "all samples share one range; slope is undetermined".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = samples
        .iter()
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(AttenuationEntry {
        slope_db_per_m: slope,
        intercept_db: intercept,
        n_points: samples.len(),
        rmse: (ss_res / n).sqrt(),
    })
}

/// Per-class attenuation model. Serializes to a JSON object keyed by class
/// label, each entry holding `slope_db_per_m`, `intercept_db`, `n_points`
/// and `rmse`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttenuationModel {
    classes: BTreeMap<String, AttenuationEntry>,
}

impl AttenuationModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fit every class from grouped (range, mean power) samples.
    pub fn fit(samples_by_class: &BTreeMap<String, Vec<(f64, f64)>>) -> Result<Self> {
        let mut classes = BTreeMap::new();
        for (class, samples) in samples_by_class {
            let entry = fit_attenuation(samples)?;
            classes.insert(class.clone(), entry);
        }
        Ok(AttenuationModel { classes })
    }

    pub fn insert(&mut self, class: impl Into<String>, entry: AttenuationEntry) {
        self.classes.insert(class.into(), entry);
    }

    pub fn get(&self, class: &str) -> Result<&AttenuationEntry> {
        self.classes
            .get(class)
            .ok_or_else(|| Error::UnknownClass(class.to_string()))
    }

    pub fn contains(&self, class: &str) -> bool {
        self.classes.contains_key(class)
    }

    pub fn classes(&self) -> impl Iterator<Item = (&String, &AttenuationEntry)> {
        self.classes.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Shift object pixels by `(r_new - r_curr) * slope` dB; background pixels
/// are copied bit-identically.
pub fn apply_attenuation(
    img: &CartesianImage,
    mask: &ObjectMask,
    slope_db_per_m: f64,
    r_curr_m: f64,
    r_new_m: f64,
) -> Result<CartesianImage> {
    if !mask.matches(img) {
        return Err(Error::invalid(format!(
            "mask {}x{} does not match image {}x{}",
            mask.width,
            mask.height,
            img.width(),
            img.height()
        )));
    }
    if !slope_db_per_m.is_finite() || !r_curr_m.is_finite() || !r_new_m.is_finite() {
        return Err(Error::domain("attenuation arguments must be finite"));
    }
    let delta = (r_new_m - r_curr_m) * slope_db_per_m;
    let mut out = img.clone();
    for (v, m) in out.data_mut().iter_mut().zip(mask.data.iter()) {
        if *m {
            *v += delta;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CartesianImage;

    fn image_from(values: &[f64], width: usize, height: usize) -> CartesianImage {
        CartesianImage::new(
            values.to_vec(),
            width,
            height,
            0.05,
            0.0,
            (height - 1) as f64 * 0.05,
            0.0,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn segmentation_matches_direct_comparison() {
        let img = image_from(&[-10.0, 5.0, -10.0, 12.0], 2, 2);
        let mask = segment_threshold(&img, 0.0);
        assert_eq!(mask.data(), &[false, true, false, true]);

        let low = image_from(&[-5.0; 4], 2, 2);
        assert_eq!(segment_threshold(&low, 0.0).count(), 0);
        let high = image_from(&[5.0; 4], 2, 2);
        assert_eq!(segment_threshold(&high, 0.0).count(), 4);
    }

    #[test]
    fn mean_power_over_mask() {
        let img = image_from(&[4.0, 8.0, -40.0, -40.0], 2, 2);
        let mask = segment_threshold(&img, 0.0);
        assert_eq!(mean_object_power(&img, &mask).unwrap(), 6.0);

        let one = image_from(&[3.5, -40.0, -40.0, -40.0], 2, 2);
        let m = segment_threshold(&one, 0.0);
        assert_eq!(mean_object_power(&one, &m).unwrap(), 3.5);

        let uniform = image_from(&[7.0; 4], 2, 2);
        let all = segment_threshold(&uniform, 0.0);
        assert_eq!(mean_object_power(&uniform, &all).unwrap(), 7.0);
    }

    #[test]
    fn mean_power_rejects_empty_mask() {
        let img = image_from(&[-5.0; 4], 2, 2);
        let mask = segment_threshold(&img, 0.0);
        assert!(matches!(
            mean_object_power(&img, &mask),
            Err(Error::EmptySelection(_))
        ));
    }

    #[test]
    fn ols_recovers_collinear_points_exactly() {
        let fit = fit_attenuation(&[(3.0, -3.0), (6.0, -6.0), (9.0, -9.0)]).unwrap();
        assert!((fit.slope_db_per_m - -1.0).abs() < 1e-12);
        assert!(fit.intercept_db.abs() < 1e-12);
        assert!(fit.rmse < 1e-12);

        let flat = fit_attenuation(&[(2.0, 5.0), (4.0, 5.0)]).unwrap();
        assert_eq!(flat.slope_db_per_m, 0.0);
        assert_eq!(flat.intercept_db, 5.0);
    }

    #[test]
    fn ols_rejects_degenerate_input() {
        assert!(matches!(
            fit_attenuation(&[(3.0, 1.0)]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            fit_attenuation(&[(3.0, 1.0), (3.0, 2.0), (3.0, 5.0)]),
            Err(Error::SingularFit(_))
        ));
    }

    #[test]
    fn ols_is_consistent_under_noise() {
        use rand::Rng;
        use rand_distr::{Distribution, Normal};
        let mut rng = crate::rng::seeded_rng(11);
        let noise = Normal::new(0.0, 0.1).unwrap();
        for _ in 0..100 {
            let samples: Vec<(f64, f64)> = (0..50)
                .map(|_| {
                    let x: f64 = rng.random_range(2.0..15.0);
                    (x, 4.0 - 0.7 * x + noise.sample(&mut rng))
                })
                .collect();
            let fit = fit_attenuation(&samples).unwrap();
            assert!(
                (fit.slope_db_per_m - -0.7).abs() < 0.05,
                "slope {} too far from -0.7",
                fit.slope_db_per_m
            );
        }
    }

    #[test]
    fn attenuation_shifts_object_and_preserves_background() {
        let img = image_from(&[10.0, -30.0, 10.0, -30.0], 2, 2);
        let mask = segment_threshold(&img, 0.0);
        let out = apply_attenuation(&img, &mask, -0.5, 4.0, 6.0).unwrap();
        assert_eq!(out.get(0, 0), 9.0);
        assert_eq!(out.get(0, 1), 9.0);
        // Background is bit-identical under any slope and range shift.
        assert_eq!(out.get(1, 0).to_bits(), (-30.0f64).to_bits());
        assert_eq!(out.get(1, 1).to_bits(), (-30.0f64).to_bits());
    }

    #[test]
    fn attenuation_identity_when_range_unchanged() {
        let img = image_from(&[10.0, -30.0, 7.5, -28.0], 2, 2);
        let mask = segment_threshold(&img, 0.0);
        let out = apply_attenuation(&img, &mask, -1.3, 5.0, 5.0).unwrap();
        assert_eq!(out.data(), img.data());
    }

    #[test]
    fn attenuation_rejects_mismatched_mask() {
        let img = image_from(&[0.0; 4], 2, 2);
        let other = image_from(&[0.0; 9], 3, 3);
        let mask = segment_threshold(&other, -1.0);
        assert!(apply_attenuation(&img, &mask, -0.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn model_lookup_and_round_trip() {
        let mut model = AttenuationModel::new();
        model.insert(
            "trolley",
            AttenuationEntry {
                slope_db_per_m: -0.62,
                intercept_db: 1.4,
                n_points: 12,
                rmse: 0.21,
            },
        );
        assert!(model.get("trolley").is_ok());
        assert!(matches!(model.get("cone"), Err(Error::UnknownClass(_))));

        let json = serde_json::to_string(&model).unwrap();
        assert!(json.contains("\"slope_db_per_m\":-0.62"));
        let back: AttenuationModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn auto_threshold_separates_strong_object() {
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(3);
        let mut img = CartesianImage::filled(-40.0, 80, 80, 0.05, -2.0, 3.95).unwrap();
        for v in img.data_mut() {
            *v += rng.random_range(-1.0..1.0);
        }
        // Object well inside the image, far above the noise floor.
        for r in 30..40 {
            for c in 35..45 {
                img.set(c, r, 0.0);
            }
        }
        let t = auto_threshold(&img);
        assert!(t > -41.0 && t < -30.0, "threshold {t}");
        let mask = segment_threshold(&img, t);
        assert_eq!(mask.count(), 100);
    }
}
