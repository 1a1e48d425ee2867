//! On-disk scan format: a raw little-endian f32 payload next to a JSON
//! sidecar at `<payload>.json` describing the grid.
//!
//! Polar sidecars carry `azimuth_bins`, `range_bins`, `range_resolution_m`,
//! `azimuth_start_deg`, `azimuth_step_deg` and `unit`, plus the azimuth
//! sign convention (degrees clockwise from boresight); Cartesian sidecars
//! carry `width`, `height`, `meters_per_pixel_m`, the origin and sensor
//! positions and `unit`. The only supported unit is "dB".

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CartesianImage, PolarImage};

/// Sidecar location for a payload: the payload path with `.json` appended.
pub fn sidecar_path(payload: &Path) -> PathBuf {
    let mut os = payload.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

/// Azimuth sign convention recorded in every polar sidecar.
const AZIMUTH_CONVENTION: &str = "deg_cw_from_boresight";

fn default_convention() -> String {
    AZIMUTH_CONVENTION.to_string()
}

#[derive(Debug, Serialize, Deserialize)]
struct PolarSidecar {
    azimuth_bins: usize,
    range_bins: usize,
    range_resolution_m: f64,
    azimuth_start_deg: f64,
    azimuth_step_deg: f64,
    unit: String,
    #[serde(default = "default_convention")]
    azimuth_convention: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CartesianSidecar {
    width: usize,
    height: usize,
    meters_per_pixel_m: f64,
    origin_x_m: f64,
    origin_y_m: f64,
    sensor_x_m: f64,
    sensor_y_m: f64,
    unit: String,
}

fn write_payload(data: &[f64], path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(data.len() * 4);
    for v in data {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

fn read_payload(path: &Path, expected_values: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    let expected_bytes = expected_values * 4;
    if bytes.len() != expected_bytes {
        return Err(Error::format(
            path.display().to_string(),
            format!(
                "payload is {} bytes, expected {expected_bytes} (4 x {expected_values} samples)",
                bytes.len()
            ),
        ));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

fn read_sidecar_value(payload: &Path) -> Result<serde_json::Value> {
    let side = sidecar_path(payload);
    let text = fs::read_to_string(&side).map_err(|e| {
        Error::format(
            side.display().to_string(),
            format!("missing or unreadable sidecar: {e}"),
        )
    })?;
    serde_json::from_str(&text)
        .map_err(|e| Error::format(side.display().to_string(), format!("bad sidecar JSON: {e}")))
}

fn check_unit(unit: &str, path: &Path) -> Result<()> {
    if unit != "dB" {
        return Err(Error::format(
            path.display().to_string(),
            format!("unsupported unit '{unit}', expected 'dB'"),
        ));
    }
    Ok(())
}

/// Write a polar scan and its sidecar.
pub fn save_scan(img: &PolarImage, path: &Path) -> Result<()> {
    write_payload(img.data(), path)?;
    let sidecar = PolarSidecar {
        azimuth_bins: img.azimuth_bins(),
        range_bins: img.range_bins(),
        range_resolution_m: img.range_resolution_m,
        azimuth_start_deg: img.azimuth_start_deg,
        azimuth_step_deg: img.azimuth_step_deg,
        unit: "dB".into(),
        azimuth_convention: AZIMUTH_CONVENTION.into(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

/// Read a polar scan written by [`save_scan`].
pub fn load_scan(path: &Path) -> Result<PolarImage> {
    let value = read_sidecar_value(path)?;
    let side: PolarSidecar = serde_json::from_value(value).map_err(|e| {
        Error::format(
            sidecar_path(path).display().to_string(),
            format!("not a polar scan sidecar: {e}"),
        )
    })?;
    check_unit(&side.unit, path)?;
    if side.azimuth_convention != AZIMUTH_CONVENTION {
        return Err(Error::format(
            path.display().to_string(),
            format!(
                "unsupported azimuth convention '{}', expected '{AZIMUTH_CONVENTION}'",
                side.azimuth_convention
            ),
        ));
    }
    let data = read_payload(path, side.azimuth_bins * side.range_bins)?;
    PolarImage::new(
        data,
        side.azimuth_bins,
        side.range_bins,
        side.range_resolution_m,
        side.azimuth_start_deg,
        side.azimuth_step_deg,
    )
}

/// Write a Cartesian scan and its sidecar.
pub fn save_cartesian_scan(img: &CartesianImage, path: &Path) -> Result<()> {
    write_payload(img.data(), path)?;
    let sidecar = CartesianSidecar {
        width: img.width(),
        height: img.height(),
        meters_per_pixel_m: img.meters_per_pixel,
        origin_x_m: img.origin_x_m,
        origin_y_m: img.origin_y_m,
        sensor_x_m: img.sensor_x_m,
        sensor_y_m: img.sensor_y_m,
        unit: "dB".into(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

/// Read a Cartesian scan written by [`save_cartesian_scan`].
pub fn load_cartesian_scan(path: &Path) -> Result<CartesianImage> {
    let value = read_sidecar_value(path)?;
    let side: CartesianSidecar = serde_json::from_value(value).map_err(|e| {
        Error::format(
            sidecar_path(path).display().to_string(),
            format!("not a cartesian scan sidecar: {e}"),
        )
    })?;
    check_unit(&side.unit, path)?;
    let data = read_payload(path, side.width * side.height)?;
    CartesianImage::new(
        data,
        side.width,
        side.height,
        side.meters_per_pixel_m,
        side.origin_x_m,
        side.origin_y_m,
        side.sensor_x_m,
        side.sensor_y_m,
    )
}

/// A scan of either grid kind, distinguished by its sidecar keys.
#[derive(Debug, Clone)]
pub enum Scan {
    Polar(PolarImage),
    Cartesian(CartesianImage),
}

/// Load a scan, sniffing the grid kind from the sidecar.
pub fn load_any_scan(path: &Path) -> Result<Scan> {
    let value = read_sidecar_value(path)?;
    if value.get("azimuth_bins").is_some() {
        Ok(Scan::Polar(load_scan(path)?))
    } else if value.get("width").is_some() {
        Ok(Scan::Cartesian(load_cartesian_scan(path)?))
    } else {
        Err(Error::format(
            sidecar_path(path).display().to_string(),
            "sidecar is neither polar (azimuth_bins) nor cartesian (width)",
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_polar(seed: u64) -> PolarImage {
        let mut rng = crate::rng::seeded_rng(seed);
        // f32-representable values so save/load is bit-exact.
        let data: Vec<f64> = (0..24 * 32)
            .map(|_| rng.random_range(-60.0f32..0.0) as f64)
            .collect();
        PolarImage::new(data, 24, 32, 0.05, -11.5, 1.0).unwrap()
    }

    #[test]
    fn polar_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.bin");
        let img = random_polar(5);
        save_scan(&img, &path).unwrap();
        let back = load_scan(&path).unwrap();
        assert_eq!(back.data(), img.data());
        assert_eq!(back.range_resolution_m, img.range_resolution_m);
        assert_eq!(back.azimuth_start_deg, img.azimuth_start_deg);

        // Re-saving reproduces identical bytes.
        let first = std::fs::read(&path).unwrap();
        save_scan(&back, &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first);
    }

    #[test]
    fn cartesian_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cart.bin");
        let mut rng = crate::rng::seeded_rng(9);
        let data: Vec<f64> = (0..16 * 16)
            .map(|_| rng.random_range(-60.0f32..0.0) as f64)
            .collect();
        let img = CartesianImage::new(data, 16, 16, 0.05, -0.4, 1.15, 0.0, 0.0).unwrap();
        save_cartesian_scan(&img, &path).unwrap();
        let back = load_cartesian_scan(&path).unwrap();
        assert_eq!(back.data(), img.data());
        match load_any_scan(&path).unwrap() {
            Scan::Cartesian(c) => assert_eq!(c.data(), img.data()),
            Scan::Polar(_) => panic!("mis-sniffed grid kind"),
        }
    }

    #[test]
    fn truncated_payload_reports_byte_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.bin");
        save_scan(&random_polar(1), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
        match load_scan(&path) {
            Err(Error::Format { reason, .. }) => {
                assert!(reason.contains(&format!("{}", bytes.len() - 7)), "{reason}");
                assert!(reason.contains(&format!("{}", bytes.len())), "{reason}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn missing_sidecar_and_bad_unit_are_format_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.bin");
        save_scan(&random_polar(2), &path).unwrap();

        let side = sidecar_path(&path);
        let text = std::fs::read_to_string(&side).unwrap();
        std::fs::write(&side, text.replace("dB", "watts")).unwrap();
        match load_scan(&path) {
            Err(Error::Format { reason, .. }) => assert!(reason.contains("watts")),
            other => panic!("expected format error, got {other:?}"),
        }

        std::fs::remove_file(&side).unwrap();
        assert!(matches!(load_scan(&path), Err(Error::Format { .. })));
    }
}
