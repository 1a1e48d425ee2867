//! Fixed-size box proposals and patch extraction.

use serde::{Deserialize, Serialize};

use crate::detect::dbscan::Cluster;
use crate::error::{Error, Result};
use crate::geometry::{CartesianImage, InterpMethod};

/// Axis-aligned box in pixel coordinates, upper-left anchored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxRect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl BoxRect {
    pub fn new(x: f64, y: f64, width: f64, height: f64) -> Self {
        BoxRect {
            x,
            y,
            width,
            height,
        }
    }
}

/// A classified detection: box, class label and score in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledBox {
    pub class: String,
    pub score: f64,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl LabeledBox {
    pub fn rect(&self) -> BoxRect {
        BoxRect::new(self.x, self.y, self.width, self.height)
    }
}

/// One fixed-size box per cluster, centred on the centroid and clamped to
/// stay inside the image. Boxes larger than the image shrink to fit.
pub fn clusters_to_boxes(
    clusters: &[Cluster],
    box_side_px: usize,
    img: &CartesianImage,
) -> Vec<BoxRect> {
    let side_w = box_side_px.min(img.width());
    let side_h = box_side_px.min(img.height());
    clusters
        .iter()
        .map(|c| {
            let (col, row) = img.world_to_pixel(c.centroid.x, c.centroid.y);
            let x =
                (col.round() as i64 - (side_w / 2) as i64).clamp(0, (img.width() - side_w) as i64);
            let y =
                (row.round() as i64 - (side_h / 2) as i64).clamp(0, (img.height() - side_h) as i64);
            BoxRect::new(x as f64, y as f64, side_w as f64, side_h as f64)
        })
        .collect()
}

/// Crop `rect` out of the image (filling pixels outside the grid) and
/// resize it to `out_side` x `out_side` with corner-aligned bilinear
/// interpolation. A crop already at the target size is copied exactly.
pub fn crop_resize(
    img: &CartesianImage,
    rect: &BoxRect,
    out_side: usize,
    fill_db: f64,
) -> Result<CartesianImage> {
    if out_side == 0 {
        return Err(Error::invalid("output side must be positive"));
    }
    let bw = rect.width.round() as i64;
    let bh = rect.height.round() as i64;
    if bw <= 0 || bh <= 0 {
        return Err(Error::invalid("box must have positive dimensions"));
    }
    let bx = rect.x.round() as i64;
    let by = rect.y.round() as i64;
    let w = img.width() as i64;
    let h = img.height() as i64;
    if bx + bw <= 0 || bx >= w || by + bh <= 0 || by >= h {
        return Err(Error::invalid(format!(
            "box ({bx},{by},{bw},{bh}) lies fully outside the {w}x{h} image"
        )));
    }

    let mut crop = vec![fill_db; (bw * bh) as usize];
    for r in 0..bh {
        for c in 0..bw {
            let (sc, sr) = (bx + c, by + r);
            if sc >= 0 && sc < w && sr >= 0 && sr < h {
                crop[(r * bw + c) as usize] = img.get(sc as usize, sr as usize);
            }
        }
    }

    let src = |c: usize, r: usize| crop[r * bw as usize + c];
    let map = |i: usize, n_out: usize, n_src: i64| -> f64 {
        if n_out <= 1 {
            (n_src - 1) as f64 / 2.0
        } else {
            i as f64 * (n_src - 1) as f64 / (n_out - 1) as f64
        }
    };

    let lerp = |a: f64, b: f64, f: f64| a + f * (b - a);
    let mut data = vec![0.0; out_side * out_side];
    for r in 0..out_side {
        let sy = map(r, out_side, bh);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(bh as usize - 1);
        let fy = sy - y0 as f64;
        for c in 0..out_side {
            let sx = map(c, out_side, bw);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(bw as usize - 1);
            let fx = sx - x0 as f64;
            let top = lerp(src(x0, y0), src(x1, y0), fx);
            let bot = lerp(src(x0, y1), src(x1, y1), fx);
            data[r * out_side + c] = lerp(top, bot, fy);
        }
    }

    let origin = {
        let p = img.pixel_to_world(bx.clamp(0, w - 1) as usize, by.clamp(0, h - 1) as usize);
        (p.x, p.y)
    };
    CartesianImage::new(
        data,
        out_side,
        out_side,
        img.meters_per_pixel * bw as f64 / out_side as f64,
        origin.0,
        origin.1,
        img.sensor_x_m,
        img.sensor_y_m,
    )
}

/// Used by tests; also exercised through `crop_resize`.
#[allow(dead_code)]
pub(crate) fn sample_method() -> InterpMethod {
    InterpMethod::Bilinear
}
