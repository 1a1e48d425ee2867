//! Sensor geometry, grid types and polar/Cartesian remapping.
//!
//! Conventions used throughout the crate:
//!
//! - The sensor sits at the origin of its own frame with boresight along +y.
//! - Azimuth is measured in degrees, clockwise from boresight, so a point at
//!   range `r` and azimuth `a` has Cartesian coordinates `(r·sin a, r·cos a)`.
//! - Polar grids are azimuth-major: `data[az * range_bins + bin]`, with range
//!   bin `k` centred at radius `k · range_resolution`.
//! - Cartesian grids are row-major with row 0 at the top (largest y); pixel
//!   `(col, row)` is centred at `(origin_x + col·mpp, origin_y - row·mpp)`.
//!
//! All pixel values are power on a dB scale and treated as opaque numbers by
//! the geometry code.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Finite and strictly positive (rejects NaN).
pub(crate) fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Finite and non-negative (rejects NaN).
pub(crate) fn non_negative(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Range resolution of an FMCW radar from its sweep bandwidth: `c / (2B)`.
pub fn range_resolution(bandwidth_hz: f64) -> Result<f64> {
    if !positive(bandwidth_hz) {
        return Err(Error::domain(format!(
            "bandwidth must be positive and finite, got {bandwidth_hz}"
        )));
    }
    Ok(SPEED_OF_LIGHT / (2.0 * bandwidth_hz))
}

/// Cross-range extent of a beam cell at the given range: `2R·sin(θ/2)`.
///
/// `beamwidth_deg` is the azimuth beamwidth θ of the antenna main lobe.
pub fn cross_range_cell_size(range_m: f64, beamwidth_deg: f64) -> Result<f64> {
    if !non_negative(range_m) {
        return Err(Error::domain(format!("range must be >= 0, got {range_m}")));
    }
    if !(0.0..180.0).contains(&beamwidth_deg) {
        return Err(Error::domain(format!(
            "beamwidth must be in [0, 180) degrees, got {beamwidth_deg}"
        )));
    }
    Ok(2.0 * range_m * (beamwidth_deg.to_radians() / 2.0).sin())
}

/// Static description of the scanning sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    /// Sweep bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Azimuth (H-plane) beamwidth θ in degrees.
    pub azimuth_beamwidth_deg: f64,
    /// Angular spacing between consecutive scan lines in degrees.
    pub azimuth_step_deg: f64,
    /// Number of range bins per scan line.
    pub range_bins: usize,
    /// Number of azimuth lines per scan.
    pub azimuth_bins: usize,
    /// Maximum range in meters. Must equal `range_resolution * range_bins`.
    pub max_range_m: f64,
}

impl SensorConfig {
    /// Build a config from the radar parameters, deriving `max_range_m`
    /// from the bandwidth and bin count.
    pub fn from_bandwidth(
        bandwidth_hz: f64,
        azimuth_beamwidth_deg: f64,
        azimuth_step_deg: f64,
        range_bins: usize,
        azimuth_bins: usize,
    ) -> Result<Self> {
        let res = range_resolution(bandwidth_hz)?;
        let cfg = SensorConfig {
            bandwidth_hz,
            azimuth_beamwidth_deg,
            azimuth_step_deg,
            range_bins,
            azimuth_bins,
            max_range_m: res * range_bins as f64,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check all invariants, including consistency of `max_range_m` with the
    /// bandwidth-derived range resolution (1e-9 relative tolerance).
    pub fn validate(&self) -> Result<()> {
        if !positive(self.bandwidth_hz) {
            return Err(Error::domain("bandwidth must be positive"));
        }
        if !(positive(self.azimuth_beamwidth_deg) && self.azimuth_beamwidth_deg < 180.0) {
            return Err(Error::domain(
                "azimuth beamwidth must be in (0, 180) degrees",
            ));
        }
        if !positive(self.azimuth_step_deg) {
            return Err(Error::domain("azimuth step must be positive"));
        }
        if self.range_bins == 0 || self.azimuth_bins == 0 {
            return Err(Error::domain("bin counts must be positive"));
        }
        let derived = range_resolution(self.bandwidth_hz)? * self.range_bins as f64;
        if (derived - self.max_range_m).abs() > 1e-9 * derived.abs().max(self.max_range_m.abs()) {
            return Err(Error::domain(format!(
                "max_range {} m inconsistent with bandwidth-derived {} m",
                self.max_range_m, derived
            )));
        }
        Ok(())
    }

    /// Range bin spacing in meters.
    pub fn range_resolution_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)
    }

    /// Azimuth of scan line 0, placing the scanned fan symmetrically about
    /// boresight.
    pub fn azimuth_start_deg(&self) -> f64 {
        -self.azimuth_step_deg * (self.azimuth_bins as f64 - 1.0) / 2.0
    }
}

/// A point in the sensor's Cartesian frame (meters, boresight along +y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
}

impl GridPoint {
    pub fn new(x: f64, y: f64) -> Self {
        GridPoint { x, y }
    }

    pub fn distance(&self, other: &GridPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Interpolation used when remapping between grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpMethod {
    Nearest,
    Bilinear,
}

/// `a + f * (b - a)`: exact at f = 0 and on constant inputs.
pub(crate) fn lerp(a: f64, b: f64, f: f64) -> f64 {
    a + f * (b - a)
}

/// Raw scan: power in dB on an (azimuth × range) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarImage {
    data: Vec<f64>,
    azimuth_bins: usize,
    range_bins: usize,
    /// Meters per range bin.
    pub range_resolution_m: f64,
    /// Azimuth of line 0, degrees clockwise from boresight.
    pub azimuth_start_deg: f64,
    /// Degrees per azimuth line.
    pub azimuth_step_deg: f64,
}

impl PolarImage {
    /// Wrap an azimuth-major buffer. Fails on dimension mismatch, empty
    /// grids, non-finite samples or degenerate bin geometry.
    pub fn new(
        data: Vec<f64>,
        azimuth_bins: usize,
        range_bins: usize,
        range_resolution_m: f64,
        azimuth_start_deg: f64,
        azimuth_step_deg: f64,
    ) -> Result<Self> {
        if azimuth_bins == 0 || range_bins == 0 {
            return Err(Error::invalid("polar image must have at least one cell"));
        }
        if data.len() != azimuth_bins * range_bins {
            return Err(Error::invalid(format!(
                "polar data length {} != {} azimuth bins x {} range bins",
                data.len(),
                azimuth_bins,
                range_bins
            )));
        }
        if !positive(range_resolution_m) || !positive(azimuth_step_deg) {
            return Err(Error::domain("bin sizes must be positive"));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite power value at flat index {bad}"
            )));
        }
        Ok(PolarImage {
            data,
            azimuth_bins,
            range_bins,
            range_resolution_m,
            azimuth_start_deg,
            azimuth_step_deg,
        })
    }

    /// Constant-valued scan, handy for tests and synthetic scenes.
    pub fn filled(
        value: f64,
        azimuth_bins: usize,
        range_bins: usize,
        range_resolution_m: f64,
        azimuth_start_deg: f64,
        azimuth_step_deg: f64,
    ) -> Result<Self> {
        PolarImage::new(
            vec![value; azimuth_bins * range_bins],
            azimuth_bins,
            range_bins,
            range_resolution_m,
            azimuth_start_deg,
            azimuth_step_deg,
        )
    }

    pub fn azimuth_bins(&self) -> usize {
        self.azimuth_bins
    }

    pub fn range_bins(&self) -> usize {
        self.range_bins
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, azimuth: usize, bin: usize) -> f64 {
        self.data[azimuth * self.range_bins + bin]
    }

    pub fn set(&mut self, azimuth: usize, bin: usize, value: f64) {
        self.data[azimuth * self.range_bins + bin] = value;
    }

    /// One scan line (all range bins at a fixed azimuth).
    pub fn line(&self, azimuth: usize) -> &[f64] {
        let start = azimuth * self.range_bins;
        &self.data[start..start + self.range_bins]
    }

    /// Azimuth of line `j` in degrees.
    pub fn azimuth_of(&self, j: usize) -> f64 {
        self.azimuth_start_deg + j as f64 * self.azimuth_step_deg
    }

    /// Sensor-frame position of cell (azimuth line `j`, range bin `k`).
    pub fn cell_position(&self, j: usize, k: usize) -> GridPoint {
        let a = self.azimuth_of(j).to_radians();
        let r = k as f64 * self.range_resolution_m;
        GridPoint::new(r * a.sin(), r * a.cos())
    }

    /// Sample at continuous coordinates (azimuth index `v`, range index `u`).
    /// Neighbors are clamped to the grid, so a constant image stays constant.
    fn sample(&self, v: f64, u: f64, method: InterpMethod) -> f64 {
        match method {
            InterpMethod::Nearest => {
                let j = (v.round().max(0.0) as usize).min(self.azimuth_bins - 1);
                let k = (u.round().max(0.0) as usize).min(self.range_bins - 1);
                self.get(j, k)
            }
            InterpMethod::Bilinear => {
                let clamp_a = |i: f64| (i.max(0.0) as usize).min(self.azimuth_bins - 1);
                let clamp_r = |i: f64| (i.max(0.0) as usize).min(self.range_bins - 1);
                let v0 = v.floor();
                let u0 = u.floor();
                let fv = v - v0;
                let fu = u - u0;
                let (j0, j1) = (clamp_a(v0), clamp_a(v0 + 1.0));
                let (k0, k1) = (clamp_r(u0), clamp_r(u0 + 1.0));
                // lerp form keeps constants exact.
                let top = lerp(self.get(j0, k0), self.get(j0, k1), fu);
                let bot = lerp(self.get(j1, k0), self.get(j1, k1), fu);
                lerp(top, bot, fv)
            }
        }
    }
}

/// Resampled scan: power in dB on a uniform metric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianImage {
    data: Vec<f64>,
    width: usize,
    height: usize,
    /// Grid spacing in meters per pixel.
    pub meters_per_pixel: f64,
    /// World x of the centre of pixel (0, 0).
    pub origin_x_m: f64,
    /// World y of the centre of pixel (0, 0). Rows run towards -y.
    pub origin_y_m: f64,
    /// Sensor position in the same world frame.
    pub sensor_x_m: f64,
    /// Sensor position in the same world frame.
    pub sensor_y_m: f64,
}

impl CartesianImage {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        data: Vec<f64>,
        width: usize,
        height: usize,
        meters_per_pixel: f64,
        origin_x_m: f64,
        origin_y_m: f64,
        sensor_x_m: f64,
        sensor_y_m: f64,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(
                "cartesian image must have at least one pixel",
            ));
        }
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "cartesian data length {} != {width} x {height}",
                data.len()
            )));
        }
        if !positive(meters_per_pixel) {
            return Err(Error::domain("meters_per_pixel must be positive"));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite power value at flat index {bad}"
            )));
        }
        Ok(CartesianImage {
            data,
            width,
            height,
            meters_per_pixel,
            origin_x_m,
            origin_y_m,
            sensor_x_m,
            sensor_y_m,
        })
    }

    /// Constant-valued image with the sensor at the world origin and pixel
    /// (0,0) at the given world position.
    pub fn filled(
        value: f64,
        width: usize,
        height: usize,
        meters_per_pixel: f64,
        origin_x_m: f64,
        origin_y_m: f64,
    ) -> Result<Self> {
        CartesianImage::new(
            vec![value; width * height],
            width,
            height,
            meters_per_pixel,
            origin_x_m,
            origin_y_m,
            0.0,
            0.0,
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    /// World position of the centre of pixel `(col, row)`.
    pub fn pixel_to_world(&self, col: usize, row: usize) -> GridPoint {
        GridPoint::new(
            self.origin_x_m + col as f64 * self.meters_per_pixel,
            self.origin_y_m - row as f64 * self.meters_per_pixel,
        )
    }

    /// Continuous pixel coordinates of a world position.
    pub fn world_to_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.origin_x_m) / self.meters_per_pixel,
            (self.origin_y_m - y) / self.meters_per_pixel,
        )
    }

    /// Distance from the sensor to the centre of pixel `(col, row)`.
    pub fn range_from_sensor(&self, col: usize, row: usize) -> f64 {
        let p = self.pixel_to_world(col, row);
        (p.x - self.sensor_x_m).hypot(p.y - self.sensor_y_m)
    }

    /// Flat index of the largest sample (first one in scan order on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0usize;
        for (i, v) in self.data.iter().enumerate() {
            if *v > self.data[best] {
                best = i;
            }
        }
        (best % self.width, best / self.width)
    }

    /// Sample at continuous pixel coordinates, `None` outside the grid.
    pub(crate) fn sample(&self, col: f64, row: f64, method: InterpMethod) -> Option<f64> {
        let w = self.width as f64;
        let h = self.height as f64;
        if !(-0.5..=w - 0.5).contains(&col) || !(-0.5..=h - 0.5).contains(&row) {
            return None;
        }
        Some(match method {
            InterpMethod::Nearest => {
                let c = (col.round().max(0.0) as usize).min(self.width - 1);
                let r = (row.round().max(0.0) as usize).min(self.height - 1);
                self.get(c, r)
            }
            InterpMethod::Bilinear => {
                let clamp_c = |i: f64| (i.max(0.0) as usize).min(self.width - 1);
                let clamp_r = |i: f64| (i.max(0.0) as usize).min(self.height - 1);
                let c0 = col.floor();
                let r0 = row.floor();
                let fc = col - c0;
                let fr = row - r0;
                let (ca, cb) = (clamp_c(c0), clamp_c(c0 + 1.0));
                let (ra, rb) = (clamp_r(r0), clamp_r(r0 + 1.0));
                let top = lerp(self.get(ca, ra), self.get(cb, ra), fc);
                let bot = lerp(self.get(ca, rb), self.get(cb, rb), fc);
                lerp(top, bot, fr)
            }
        })
    }
}

/// Bounding box `(x_min, x_max, y_min, y_max)` of the scanned sector,
/// including the sensor apex at the origin.
fn sector_bounds(outer_radius: f64, az_lo_deg: f64, az_hi_deg: f64) -> (f64, f64, f64, f64) {
    let mut candidates = vec![az_lo_deg, az_hi_deg];
    let mut k = (az_lo_deg / 90.0).ceil() as i64;
    while (k as f64) * 90.0 <= az_hi_deg {
        candidates.push(k as f64 * 90.0);
        k += 1;
    }
    let (mut x_min, mut x_max, mut y_min, mut y_max) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for a in candidates {
        let rad = a.to_radians();
        let x = outer_radius * rad.sin();
        let y = outer_radius * rad.cos();
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    (x_min, x_max, y_min, y_max)
}

/// Resample a polar scan onto a uniform metric grid.
///
/// The output frame puts the sensor at the world origin. Pixels whose centre
/// falls inside the scanned sector are interpolated from the polar grid;
/// everything else gets `fill_db`.
pub fn polar_to_cartesian(
    img: &PolarImage,
    meters_per_pixel: f64,
    method: InterpMethod,
    fill_db: f64,
) -> Result<CartesianImage> {
    if !positive(meters_per_pixel) {
        return Err(Error::domain("meters_per_pixel must be positive"));
    }
    let n_az = img.azimuth_bins as f64;
    let n_r = img.range_bins as f64;
    let outer = (n_r - 0.5) * img.range_resolution_m;
    let az_lo = img.azimuth_start_deg - 0.5 * img.azimuth_step_deg;
    let az_hi = img.azimuth_start_deg + (n_az - 0.5) * img.azimuth_step_deg;
    let (x_min, x_max, y_min, y_max) = sector_bounds(outer, az_lo, az_hi);

    let width = (((x_max - x_min) / meters_per_pixel).ceil() as usize).max(1);
    let height = (((y_max - y_min) / meters_per_pixel).ceil() as usize).max(1);
    let origin_x = x_min + 0.5 * meters_per_pixel;
    let origin_y = y_max - 0.5 * meters_per_pixel;

    let mut data = vec![fill_db; width * height];
    for row in 0..height {
        let y = origin_y - row as f64 * meters_per_pixel;
        for col in 0..width {
            let x = origin_x + col as f64 * meters_per_pixel;
            let r = x.hypot(y);
            let a = x.atan2(y).to_degrees();
            let u = r / img.range_resolution_m;
            let v = (a - img.azimuth_start_deg) / img.azimuth_step_deg;
            if u >= -0.5 && u <= n_r - 0.5 && v >= -0.5 && v <= n_az - 0.5 {
                data[row * width + col] = img.sample(v, u, method);
            }
        }
    }
    CartesianImage::new(
        data,
        width,
        height,
        meters_per_pixel,
        origin_x,
        origin_y,
        0.0,
        0.0,
    )
}

/// Inverse of [`polar_to_cartesian`]: sample a Cartesian image back onto the
/// polar grid described by `sensor`. Cells outside the image get `fill_db`.
pub fn cartesian_to_polar(
    img: &CartesianImage,
    sensor: &SensorConfig,
    method: InterpMethod,
    fill_db: f64,
) -> Result<PolarImage> {
    sensor.validate()?;
    let range_res = sensor.range_resolution_m();
    let az_start = sensor.azimuth_start_deg();
    let mut data = vec![fill_db; sensor.azimuth_bins * sensor.range_bins];
    for j in 0..sensor.azimuth_bins {
        let a = (az_start + j as f64 * sensor.azimuth_step_deg).to_radians();
        let (sin_a, cos_a) = a.sin_cos();
        for k in 0..sensor.range_bins {
            let r = k as f64 * range_res;
            let x = img.sensor_x_m + r * sin_a;
            let y = img.sensor_y_m + r * cos_a;
            let (col, row) = img.world_to_pixel(x, y);
            if let Some(v) = img.sample(col, row, method) {
                data[j * sensor.range_bins + k] = v;
            }
        }
    }
    PolarImage::new(
        data,
        sensor.azimuth_bins,
        sensor.range_bins,
        range_res,
        az_start,
        sensor.azimuth_step_deg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn range_resolution_matches_published_sensors() {
        // 20 GHz sweep -> 0.75 cm; 6 GHz sweep -> 2.5 cm.
        assert!(close(range_resolution(20e9).unwrap(), 0.007495, 5e-6));
        assert!(close(range_resolution(6e9).unwrap(), 0.02498, 5e-6));
        assert!(close(range_resolution(1.0).unwrap(), 1.49896229e8, 1.0));
    }

    #[test]
    fn range_resolution_rejects_bad_bandwidth() {
        assert!(range_resolution(0.0).is_err());
        assert!(range_resolution(-5.0).is_err());
        assert!(range_resolution(f64::NAN).is_err());
    }

    #[test]
    fn cross_range_matches_published_sensors() {
        // 1.2 deg at 10 m -> ~20 cm; 2.2 deg at 10 m -> ~38 cm.
        assert!(close(
            cross_range_cell_size(10.0, 1.2).unwrap(),
            0.2094,
            5e-4
        ));
        assert!(close(
            cross_range_cell_size(10.0, 2.2).unwrap(),
            0.3840,
            5e-4
        ));
        for r in [0.0, 1.0, 5.0, 123.0] {
            assert_eq!(cross_range_cell_size(r, 0.0).unwrap(), 0.0);
        }
        assert!(cross_range_cell_size(10.0, 180.0).is_err());
        assert!(cross_range_cell_size(-1.0, 1.0).is_err());
    }

    #[test]
    fn cross_range_monotone_in_both_arguments() {
        let mut prev = 0.0;
        for i in 1..50 {
            let v = cross_range_cell_size(i as f64 * 0.5, 1.2).unwrap();
            assert!(v > prev);
            prev = v;
        }
        prev = 0.0;
        for i in 1..179 {
            let v = cross_range_cell_size(10.0, i as f64).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn sensor_config_consistency() {
        let cfg = SensorConfig::from_bandwidth(20e9, 1.2, 0.25, 400, 240).unwrap();
        let res = cfg.range_resolution_m();
        assert!((res * 400.0 - cfg.max_range_m).abs() <= 1e-9 * cfg.max_range_m);

        let mut bad = cfg.clone();
        bad.max_range_m *= 1.001;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn polar_image_rejects_bad_input() {
        assert!(PolarImage::new(vec![0.0; 5], 2, 3, 0.1, 0.0, 1.0).is_err());
        assert!(PolarImage::new(vec![f64::NAN; 6], 2, 3, 0.1, 0.0, 1.0).is_err());
        assert!(PolarImage::new(vec![], 0, 0, 0.1, 0.0, 1.0).is_err());
    }

    fn test_polar(value: f64) -> PolarImage {
        // 61 lines of 1 deg covering [-30, 30], 120 bins of 5 cm.
        PolarImage::filled(value, 61, 120, 0.05, -30.0, 1.0).unwrap()
    }

    #[test]
    fn hot_cell_lands_at_analytic_position() {
        // Hot cell at r = 5 m (bin 100), azimuth 30 deg (line 60).
        let mut img = test_polar(0.0);
        img.set(60, 100, 40.0);
        let cart = polar_to_cartesian(&img, 0.05, InterpMethod::Nearest, -100.0).unwrap();
        let (col, row) = cart.argmax();
        let p = cart.pixel_to_world(col, row);
        let expect_x = 5.0 * 30f64.to_radians().sin();
        let expect_y = 5.0 * 30f64.to_radians().cos();
        assert!(close(p.x, expect_x, 0.05), "x {} vs {}", p.x, expect_x);
        assert!(close(p.y, expect_y, 0.05), "y {} vs {}", p.y, expect_y);
    }

    #[test]
    fn constant_polar_gives_constant_sector() {
        for method in [InterpMethod::Nearest, InterpMethod::Bilinear] {
            let img = test_polar(7.25);
            let cart = polar_to_cartesian(&img, 0.05, method, -100.0).unwrap();
            for v in cart.data() {
                assert!(*v == 7.25 || *v == -100.0);
            }
            // Sector interior is present.
            let (col, row) = cart.world_to_pixel(0.0, 3.0);
            assert_eq!(cart.get(col.round() as usize, row.round() as usize), 7.25);
        }
    }

    #[test]
    fn out_of_sector_pixels_take_fill() {
        let img = test_polar(0.0);
        let cart = polar_to_cartesian(&img, 0.05, InterpMethod::Bilinear, -100.0).unwrap();
        // A corner of the bounding box lies outside the +/-30 deg fan.
        assert_eq!(cart.get(0, 0), -100.0);
        assert!(cart.data().contains(&0.0));
    }

    #[test]
    fn empty_polar_image_is_rejected() {
        assert!(PolarImage::new(Vec::new(), 0, 5, 0.05, 0.0, 1.0).is_err());
    }

    #[test]
    fn boresight_delta_maps_to_expected_bin() {
        let sensor = SensorConfig::from_bandwidth(
            SPEED_OF_LIGHT / (2.0 * 0.05), // 0.05 m bins
            2.0,
            1.0,
            120,
            61,
        )
        .unwrap();
        // Delta on boresight at r = 4 m in a Cartesian image.
        let mut cart = CartesianImage::filled(0.0, 201, 201, 0.05, -5.0, 10.0).unwrap();
        let (c, r) = cart.world_to_pixel(0.0, 4.0);
        cart.set(c.round() as usize, r.round() as usize, 50.0);
        let polar = cartesian_to_polar(&cart, &sensor, InterpMethod::Nearest, -100.0).unwrap();
        let expect_bin = (4.0f64 / 0.05).round() as usize;
        let boresight_line = ((0.0 - polar.azimuth_start_deg) / polar.azimuth_step_deg).round();
        let mut best = (0usize, 0usize, f64::NEG_INFINITY);
        for j in 0..polar.azimuth_bins() {
            for k in 0..polar.range_bins() {
                if polar.get(j, k) > best.2 {
                    best = (j, k, polar.get(j, k));
                }
            }
        }
        assert_eq!(best.0, boresight_line as usize);
        assert_eq!(best.1, expect_bin);
    }

    #[test]
    fn constant_cartesian_gives_constant_polar() {
        let sensor =
            SensorConfig::from_bandwidth(SPEED_OF_LIGHT / (2.0 * 0.05), 2.0, 1.0, 60, 41).unwrap();
        let cart = CartesianImage::filled(3.5, 200, 200, 0.05, -5.0, 9.95).unwrap();
        let polar = cartesian_to_polar(&cart, &sensor, InterpMethod::Bilinear, -100.0).unwrap();
        for j in 0..polar.azimuth_bins() {
            for k in 0..polar.range_bins() {
                let p = polar.cell_position(j, k);
                let inside = p.x > -4.9 && p.x < 4.9 && p.y < 9.9;
                if inside {
                    assert_eq!(polar.get(j, k), 3.5);
                }
            }
        }
    }

    #[test]
    fn roundtrip_gaussian_blob_within_one_db() {
        // Smooth blob rendered in polar coordinates, mapped to Cartesian at
        // half the range resolution and back. Regression bound: < 1 dB.
        let n_az = 81;
        let n_r = 160;
        let dr = 0.05;
        let step = 0.5;
        let az0 = -20.0;
        let mut data = vec![0.0; n_az * n_r];
        for j in 0..n_az {
            for k in 0..n_r {
                let a = az0 + j as f64 * step;
                let r = k as f64 * dr;
                let x = r * a.to_radians().sin();
                let y = r * a.to_radians().cos();
                let d2 = (x - 0.4f64).powi(2) + (y - 4.0f64).powi(2);
                data[j * n_r + k] = 30.0 * (-d2 / (2.0 * 0.5f64.powi(2))).exp();
            }
        }
        let polar = PolarImage::new(data, n_az, n_r, dr, az0, step).unwrap();
        let sensor =
            SensorConfig::from_bandwidth(SPEED_OF_LIGHT / (2.0 * dr), 2.0, step, n_r, n_az)
                .unwrap();
        let cart = polar_to_cartesian(&polar, dr / 2.0, InterpMethod::Bilinear, 0.0).unwrap();
        let back = cartesian_to_polar(&cart, &sensor, InterpMethod::Bilinear, 0.0).unwrap();
        let mut max_err = 0.0f64;
        for j in 0..n_az {
            for k in 0..n_r {
                let err = (back.get(j, k) - polar.get(j, k)).abs();
                max_err = max_err.max(err);
            }
        }
        assert!(max_err < 1.0, "roundtrip error {max_err} dB");
    }

    #[test]
    fn forward_mapped_deltas_land_near_analytic_position() {
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(20_260_808);
        let dr = 0.05f64;
        let mpp = 0.025f64;
        let tol_px = (1.0f64 + mpp / dr).ceil();
        for _ in 0..1000 {
            // Keep the delta where one polar cell is wider than a pixel
            // (r * step >= mpp * sqrt(2)), so the cell always captures at
            // least one pixel centre.
            let r: f64 = rng.random_range(2.2..4.6);
            let a: f64 = rng.random_range(-29.0..29.0);
            let mut img = test_polar(0.0);
            let j = ((a - img.azimuth_start_deg) / img.azimuth_step_deg).round() as usize;
            let k = (r / dr).round() as usize;
            img.set(j, k, 60.0);
            // Snapped cell centre is the analytic target.
            let p = img.cell_position(j, k);
            let cart = polar_to_cartesian(&img, mpp, InterpMethod::Nearest, -100.0).unwrap();
            let (col, row) = cart.argmax();
            let (pc, pr) = cart.world_to_pixel(p.x, p.y);
            let d_col = (col as f64 - pc).abs();
            let d_row = (row as f64 - pr).abs();
            assert!(
                d_col <= tol_px && d_row <= tol_px,
                "delta at r={r} a={a} off by ({d_col}, {d_row}) px"
            );
        }
    }
}
