//! Speckle noise, background shift and the standard translate/mirror
//! augmentations.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::augment::attenuation::ObjectMask;
use crate::error::{Error, Result};
use crate::geometry::CartesianImage;

/// Multiply every pixel by an independent `N(1, sigma_sq)` draw.
pub fn speckle_with_variance(
    img: &CartesianImage,
    rng: &mut impl Rng,
    sigma_sq: f64,
) -> Result<CartesianImage> {
    if !crate::geometry::non_negative(sigma_sq) {
        return Err(Error::domain(format!(
            "speckle variance must be >= 0, got {sigma_sq}"
        )));
    }
    let normal = Normal::new(1.0, sigma_sq.sqrt())
        .map_err(|e| Error::domain(format!("speckle distribution: {e}")))?;
    let mut out = img.clone();
    for v in out.data_mut() {
        *v *= normal.sample(rng);
    }
    Ok(out)
}

/// Speckle with a per-image variance drawn uniformly from
/// `[sigma_sq_min, sigma_sq_max]`.
pub fn speckle(
    img: &CartesianImage,
    rng: &mut impl Rng,
    sigma_sq_min: f64,
    sigma_sq_max: f64,
) -> Result<CartesianImage> {
    let sigma_sq = draw_speckle_variance(rng, sigma_sq_min, sigma_sq_max, false)?;
    speckle_with_variance(img, rng, sigma_sq)
}

/// Draw the per-image speckle variance. With `sigma_uniform` the bounds are
/// read as standard deviations and sigma itself is drawn uniformly (the
/// alternative reading of the noise-level interval); otherwise the variance
/// is drawn uniformly.
pub fn draw_speckle_variance(
    rng: &mut impl Rng,
    min: f64,
    max: f64,
    sigma_uniform: bool,
) -> Result<f64> {
    if !(0.0 <= min && min <= max) || !max.is_finite() {
        return Err(Error::domain(format!(
            "speckle bounds must satisfy 0 <= min <= max, got [{min}, {max}]"
        )));
    }
    let draw = rng.random_range(min..=max);
    Ok(if sigma_uniform { draw * draw } else { draw })
}

/// Add `delta_db` to every background pixel; object pixels are copied
/// bit-identically.
pub fn background_shift(
    img: &CartesianImage,
    mask: &ObjectMask,
    delta_db: f64,
) -> Result<CartesianImage> {
    if !mask.matches(img) {
        return Err(Error::invalid(format!(
            "mask {}x{} does not match image {}x{}",
            mask.width(),
            mask.height(),
            img.width(),
            img.height()
        )));
    }
    if !delta_db.is_finite() {
        return Err(Error::domain("background shift must be finite"));
    }
    let mut out = img.clone();
    for (v, m) in out.data_mut().iter_mut().zip(mask.data().iter()) {
        if !*m {
            *v += delta_db;
        }
    }
    Ok(out)
}

/// Shift the whole image by `(dx, dy)` pixels (columns right, rows down);
/// vacated pixels take `fill_db`.
pub fn translate(img: &CartesianImage, dx: i64, dy: i64, fill_db: f64) -> CartesianImage {
    let mut out = img.clone();
    let w = img.width() as i64;
    let h = img.height() as i64;
    for row in 0..h {
        for col in 0..w {
            let (sc, sr) = (col - dx, row - dy);
            let v = if sc >= 0 && sc < w && sr >= 0 && sr < h {
                img.get(sc as usize, sr as usize)
            } else {
                fill_db
            };
            out.set(col as usize, row as usize, v);
        }
    }
    out
}

/// Flip the image left-right.
pub fn mirror_lr(img: &CartesianImage) -> CartesianImage {
    let mut out = img.clone();
    let w = img.width();
    for row in 0..img.height() {
        for col in 0..w {
            out.set(col, row, img.get(w - 1 - col, row));
        }
    }
    out
}

/// Standard image augmentation: a uniform integer translation in
/// `[-max_translation, +max_translation]` on both axes, then an optional
/// left-right mirror.
pub fn standard_augment(
    img: &CartesianImage,
    rng: &mut impl Rng,
    max_translation_px: usize,
    mirror: bool,
    fill_db: f64,
) -> Result<CartesianImage> {
    if max_translation_px >= img.width() || max_translation_px >= img.height() {
        return Err(Error::domain(format!(
            "translation bound {max_translation_px} px must be smaller than the image"
        )));
    }
    let m = max_translation_px as i64;
    let dx = rng.random_range(-m..=m);
    let dy = rng.random_range(-m..=m);
    let shifted = translate(img, dx, dy, fill_db);
    Ok(if mirror { mirror_lr(&shifted) } else { shifted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::attenuation::segment_threshold;
    use crate::rng::seeded_rng;

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
    fn zero_variance_speckle_is_identity() {
        let img = image_from(&[1.0, -3.0, 0.25, 9.0], 2, 2);
        let mut rng = seeded_rng(1);
        let out = speckle(&img, &mut rng, 0.0, 0.0).unwrap();
        assert_eq!(out.data(), img.data());
    }

    #[test]
    fn speckle_is_deterministic_under_a_seed() {
        let img = image_from(&[1.0, -3.0, 0.25, 9.0], 2, 2);
        let a = speckle(&img, &mut seeded_rng(9), 0.01, 0.15).unwrap();
        let b = speckle(&img, &mut seeded_rng(9), 0.01, 0.15).unwrap();
        assert_eq!(a.data(), b.data());
        let c = speckle(&img, &mut seeded_rng(10), 0.01, 0.15).unwrap();
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn speckle_multiplier_mean_obeys_clt_bound() {
        let img = CartesianImage::filled(1.0, 1000, 1000, 0.05, 0.0, 49.95).unwrap();
        let mut rng = seeded_rng(2026);
        let out = speckle_with_variance(&img, &mut rng, 0.04).unwrap();
        let mean: f64 = out.data().iter().sum::<f64>() / out.data().len() as f64;
        // 4 sigma bound for the mean of 1e6 N(1, 0.04) draws.
        assert!((mean - 1.0).abs() < 4.0 * 0.2 / 1000.0, "mean {mean}");
    }

    #[test]
    fn speckle_rejects_bad_bounds() {
        let img = image_from(&[1.0; 4], 2, 2);
        assert!(speckle(&img, &mut seeded_rng(0), 0.2, 0.1).is_err());
        assert!(speckle(&img, &mut seeded_rng(0), -0.1, 0.1).is_err());
    }

    #[test]
    fn sigma_uniform_reading_squares_the_draw() {
        // With min == max the draw is deterministic under either reading.
        let v = draw_speckle_variance(&mut seeded_rng(0), 0.1, 0.1, true).unwrap();
        assert!((v - 0.01).abs() < 1e-15);
        let v = draw_speckle_variance(&mut seeded_rng(0), 0.1, 0.1, false).unwrap();
        assert!((v - 0.1).abs() < 1e-15);
    }

    #[test]
    fn background_shift_moves_only_background() {
        let img = image_from(&[12.0, -40.0, 8.0, -40.0], 2, 2);
        let mask = segment_threshold(&img, 0.0);
        let out = background_shift(&img, &mask, 3.0).unwrap();
        assert_eq!(out.get(0, 0).to_bits(), 12.0f64.to_bits());
        assert_eq!(out.get(0, 1).to_bits(), 8.0f64.to_bits());
        assert_eq!(out.get(1, 0), -37.0);
        assert_eq!(out.get(1, 1), -37.0);

        let identity = background_shift(&img, &mask, 0.0).unwrap();
        assert_eq!(identity.data(), img.data());

        let back = background_shift(&out, &mask, -3.0).unwrap();
        assert_eq!(back.data(), img.data());
    }

    #[test]
    fn background_shift_rejects_mismatched_mask() {
        let img = image_from(&[0.0; 4], 2, 2);
        let other = image_from(&[0.0; 9], 3, 3);
        let mask = segment_threshold(&other, 1.0);
        assert!(background_shift(&img, &mask, 1.0).is_err());
    }

    #[test]
    fn standard_augment_identity_case() {
        let img = image_from(&[1.0, 2.0, 3.0, 4.0], 2, 2);
        let out = standard_augment(&img, &mut seeded_rng(5), 0, false, -100.0).unwrap();
        assert_eq!(out.data(), img.data());
    }

    #[test]
    fn mirror_twice_is_identity() {
        let img = image_from(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3, 2);
        assert_eq!(mirror_lr(&mirror_lr(&img)).data(), img.data());
    }

    #[test]
    fn translation_moves_argmax_exactly() {
        let mut img = image_from(&vec![-50.0; 100], 10, 10);
        img.set(4, 6, 10.0);
        let out = translate(&img, 3, -2, -100.0);
        assert_eq!(out.argmax(), (7, 4));
        assert_eq!(out.get(7, 4), 10.0);
    }
}
