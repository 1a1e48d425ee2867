//! 16-bit grayscale PNG export for visual inspection.
//!
//! The dB range [min, max] maps linearly onto [0, 65535]; the mapping is
//! recorded in a JSON sidecar next to the PNG so values can be recovered.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::scan::sidecar_path;

#[derive(Debug, Serialize, Deserialize)]
struct PngSidecar {
    min_db: f64,
    max_db: f64,
    width: usize,
    height: usize,
}

/// Write a grid as a 16-bit grayscale PNG plus its mapping sidecar.
pub fn export_png16(data: &[f64], width: usize, height: usize, path: &Path) -> Result<()> {
    if data.len() != width * height {
        return Err(Error::invalid(format!(
            "grid length {} != {width} x {height}",
            data.len()
        )));
    }
    let min = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let mut bytes = Vec::with_capacity(data.len() * 2);
    for v in data {
        let scaled = if span > 0.0 {
            ((v - min) / span * 65535.0).round() as u16
        } else {
            0
        };
        bytes.extend_from_slice(&scaled.to_be_bytes());
    }

    let file = fs::File::create(path)?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Sixteen);
    let mut writer = encoder
        .write_header()
        .map_err(|e| Error::format(path.display().to_string(), format!("png header: {e}")))?;
    writer
        .write_image_data(&bytes)
        .map_err(|e| Error::format(path.display().to_string(), format!("png data: {e}")))?;
    writer
        .finish()
        .map_err(|e| Error::format(path.display().to_string(), format!("png finish: {e}")))?;

    let sidecar = PngSidecar {
        min_db: min,
        max_db: max,
        width,
        height,
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}
