//! Synthetic scene generation from the radar equation.
//!
//! Point scatterers are rendered into a polar power grid with a rectangular
//! beam model: a scatterer contributes to every azimuth line within half a
//! beamwidth of its bearing, at the range bin containing it. Overlapping
//! contributions add in linear power; dB conversion happens last. These
//! scenes serve as geometric ground truth for the detection pipeline.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{non_negative, positive, PolarImage, SensorConfig};

/// An ideal point target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub x_m: f64,
    pub y_m: f64,
    /// Radar cross section in m^2.
    pub rcs_m2: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub class: Option<String>,
}

impl Scatterer {
    pub fn new(x_m: f64, y_m: f64, rcs_m2: f64, class: Option<&str>) -> Self {
        Scatterer {
            x_m,
            y_m,
            rcs_m2,
            class: class.map(str::to_string),
        }
    }

    pub fn range(&self) -> f64 {
        self.x_m.hypot(self.y_m)
    }

    /// Bearing in degrees clockwise from boresight.
    pub fn bearing_deg(&self) -> f64 {
        self.x_m.atan2(self.y_m).to_degrees()
    }
}

/// Link-budget constants for the simulated transceiver.
///
/// The noise floor has no counterpart in the published hardware description;
/// the default of -60 dB relative to a 1 m^2 target at 1 m is an arbitrary
/// plumbing constant chosen to keep nearby targets comfortably visible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Transmitted power in W.
    pub transmit_power_w: f64,
    /// Antenna gain (linear, dimensionless).
    pub antenna_gain: f64,
    /// Wavelength in m.
    pub wavelength_m: f64,
    /// Loss factor (linear, >= 1).
    pub loss: f64,
    /// Mean background level in dB.
    pub noise_floor_db: f64,
    /// Standard deviation of the background in dB; 0 disables the draw.
    pub noise_std_db: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            transmit_power_w: 1.0,
            antenna_gain: 100.0,
            wavelength_m: 1e-3, // 300 GHz
            loss: 1.0,
            noise_floor_db: -60.0,
            noise_std_db: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !positive(self.transmit_power_w)
            || !positive(self.antenna_gain)
            || !positive(self.wavelength_m)
        {
            return Err(Error::domain("power, gain and wavelength must be positive"));
        }
        if !(self.loss.is_finite() && self.loss >= 1.0) {
            return Err(Error::domain("loss factor must be >= 1"));
        }
        if !non_negative(self.noise_std_db) {
            return Err(Error::domain("noise std must be >= 0"));
        }
        Ok(())
    }
}

/// Received power in W for a point scatterer:
/// `P_t G^2 sigma lambda^2 / ((4 pi)^3 R^4 L)`.
pub fn received_power(s: &Scatterer, cfg: &SimConfig, range_m: f64) -> Result<f64> {
    cfg.validate()?;
    if !positive(range_m) {
        return Err(Error::domain(format!(
            "range must be positive, got {range_m}"
        )));
    }
    if !positive(s.rcs_m2) {
        return Err(Error::domain("radar cross section must be positive"));
    }
    let four_pi = 4.0 * std::f64::consts::PI;
    Ok(
        cfg.transmit_power_w * cfg.antenna_gain.powi(2) * s.rcs_m2 * cfg.wavelength_m.powi(2)
            / (four_pi.powi(3) * range_m.powi(4) * cfg.loss),
    )
}

/// Power in dB: `10 * log10(p)`.
pub fn power_to_db(p_watts: f64) -> Result<f64> {
    if !positive(p_watts) {
        return Err(Error::domain(format!(
            "power must be positive, got {p_watts}"
        )));
    }
    Ok(10.0 * p_watts.log10())
}

/// Render a scene to a polar scan.
///
/// With `noise_std_db == 0` the output is deterministic and the RNG is never
/// touched.
pub fn render_scene(
    scatterers: &[Scatterer],
    sensor: &SensorConfig,
    cfg: &SimConfig,
    rng: &mut impl Rng,
) -> Result<PolarImage> {
    sensor.validate()?;
    cfg.validate()?;
    let dr = sensor.range_resolution_m();
    let az_start = sensor.azimuth_start_deg();
    let n_az = sensor.azimuth_bins;
    let n_r = sensor.range_bins;

    // Background first, in linear power.
    let mut linear = vec![0.0f64; n_az * n_r];
    if cfg.noise_std_db == 0.0 {
        let p = 10f64.powf(cfg.noise_floor_db / 10.0);
        linear.fill(p);
    } else {
        let normal = Normal::new(cfg.noise_floor_db, cfg.noise_std_db)
            .map_err(|e| Error::domain(format!("noise distribution: {e}")))?;
        for cell in linear.iter_mut() {
            *cell = 10f64.powf(normal.sample(rng) / 10.0);
        }
    }

    for s in scatterers {
        let range = s.range();
        if range > sensor.max_range_m {
            return Err(Error::domain(format!(
                "scatterer at ({}, {}) is {range} m out, beyond max range {} m",
                s.x_m, s.y_m, sensor.max_range_m
            )));
        }
        let power = received_power(s, cfg, range)?;
        let bin = (range / dr).floor() as usize;
        if bin >= n_r {
            continue; // range == max_range edge case
        }
        let bearing = s.bearing_deg();
        let half_beam = sensor.azimuth_beamwidth_deg / 2.0;
        for j in 0..n_az {
            let az = az_start + j as f64 * sensor.azimuth_step_deg;
            if (az - bearing).abs() <= half_beam {
                linear[j * n_r + bin] += power;
            }
        }
    }

    let data: Vec<f64> = linear.into_iter().map(|p| 10.0 * p.log10()).collect();
    PolarImage::new(data, n_az, n_r, dr, az_start, sensor.azimuth_step_deg)
}
