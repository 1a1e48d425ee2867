//! C ABI for the radarkit toolkit.
//!
//! Images are opaque handles created and freed through this API; every
//! fallible call returns an [`RkStatus`] and leaves a human-readable
//! message retrievable with [`rk_last_error_message`] on failure. The
//! header `include/radarkit.h` is generated by cbindgen at build time.
//!
//! Conventions (the safety contract for every function below):
//! - Handle and buffer pointers must be either null or valid for the call;
//!   null handles fail with `RkStatus::NullPointer` instead of crashing.
//! - Pointers returned through `out` parameters are owned by the caller and
//!   must be released with the matching `rk_*_free` function, exactly once.
//! - Strings are UTF-8 and NUL-terminated.
//! - Grids are passed as dense row-major (Cartesian) or azimuth-major
//!   (polar) `double` buffers of dB power, sized exactly as documented.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use radarkit::augment::{background_shift, segment_threshold, speckle};
use radarkit::detect::{
    detect_pipeline, BoxRect, CfarMode, CfarParams, DbscanParams, PipelineParams,
    SingleClassClassifier,
};
use radarkit::eval::{iou, msad};
use radarkit::geometry::{
    cartesian_to_polar, cross_range_cell_size, polar_to_cartesian, range_resolution,
    CartesianImage, InterpMethod, PolarImage, SensorConfig,
};
use radarkit::rng::seeded_rng;
use radarkit::Error;

/// Result code of every fallible API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    EmptySelection = 4,
    SingularFit = 5,
    UnknownClass = 6,
    Format = 7,
    Io = 8,
    Panic = 9,
}

/// Interpolation selector for grid remapping.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RkInterp {
    Nearest = 0,
    Bilinear = 1,
}

impl From<RkInterp> for InterpMethod {
    fn from(v: RkInterp) -> Self {
        match v {
            RkInterp::Nearest => InterpMethod::Nearest,
            RkInterp::Bilinear => InterpMethod::Bilinear,
        }
    }
}

/// Opaque polar scan handle.
pub struct RkPolarImage(PolarImage);

/// Opaque Cartesian image handle.
pub struct RkCartesianImage(CartesianImage);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> RkStatus {
    match err {
        Error::Domain(_) => RkStatus::Domain,
        Error::InvalidInput(_) => RkStatus::InvalidArgument,
        Error::EmptySelection(_) => RkStatus::EmptySelection,
        Error::SingularFit(_) => RkStatus::SingularFit,
        Error::UnknownClass(_) => RkStatus::UnknownClass,
        Error::Format { .. } => RkStatus::Format,
        Error::Io(_) | Error::Json(_) => RkStatus::Io,
    }
}

fn fail(err: Error) -> RkStatus {
    set_error(&err.to_string());
    status_of(&err)
}

/// Run a fallible body, translating errors and panics to status codes.
fn guarded(body: impl FnOnce() -> Result<(), Error>) -> RkStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RkStatus::Ok,
        Ok(Err(e)) => fail(e),
        Err(_) => {
            set_error("internal panic");
            RkStatus::Panic
        }
    }
}

unsafe fn path_arg<'a>(ptr: *const c_char) -> Result<&'a Path, Error> {
    if ptr.is_null() {
        return Err(Error::InvalidInput("null path".into()));
    }
    let s = unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| Error::InvalidInput("path is not valid UTF-8".into()))?;
    Ok(Path::new(s))
}

macro_rules! nonnull {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => {
                set_error("null handle");
                return RkStatus::NullPointer;
            }
        }
    };
}

macro_rules! out_param {
    ($ptr:expr) => {
        match unsafe { $ptr.as_mut() } {
            Some(r) => r,
            None => {
                set_error("null output pointer");
                return RkStatus::NullPointer;
            }
        }
    };
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the last error on this thread. Valid until the next failing
/// call from the same thread.
#[no_mangle]
pub extern "C" fn rk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Range resolution `c / (2B)` in meters.
#[no_mangle]
pub unsafe extern "C" fn rk_range_resolution(bandwidth_hz: f64, out_m: *mut f64) -> RkStatus {
    let out = out_param!(out_m);
    guarded(|| {
        *out = range_resolution(bandwidth_hz)?;
        Ok(())
    })
}

/// Cross-range cell size `2R sin(theta/2)` in meters.
#[no_mangle]
pub unsafe extern "C" fn rk_cross_range_cell_size(
    range_m: f64,
    beamwidth_deg: f64,
    out_m: *mut f64,
) -> RkStatus {
    let out = out_param!(out_m);
    guarded(|| {
        *out = cross_range_cell_size(range_m, beamwidth_deg)?;
        Ok(())
    })
}

/// Intersection-over-union of two pixel boxes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn rk_iou(
    ax: f64,
    ay: f64,
    aw: f64,
    ah: f64,
    bx: f64,
    by: f64,
    bw: f64,
    bh: f64,
    out: *mut f64,
) -> RkStatus {
    let slot = out_param!(out);
    *slot = iou(&BoxRect::new(ax, ay, aw, ah), &BoxRect::new(bx, by, bw, bh));
    RkStatus::Ok
}

// ---------------------------------------------------------------------------
// Polar image handles
// ---------------------------------------------------------------------------

/// Wrap an azimuth-major buffer of `azimuth_bins * range_bins` dB samples.
#[no_mangle]
pub unsafe extern "C" fn rk_polar_image_new(
    data: *const f64,
    azimuth_bins: usize,
    range_bins: usize,
    range_resolution_m: f64,
    azimuth_start_deg: f64,
    azimuth_step_deg: f64,
    out: *mut *mut RkPolarImage,
) -> RkStatus {
    let slot = out_param!(out);
    if data.is_null() {
        set_error("null data pointer");
        return RkStatus::NullPointer;
    }
    let values = unsafe { std::slice::from_raw_parts(data, azimuth_bins * range_bins) }.to_vec();
    guarded(|| {
        let img = PolarImage::new(
            values,
            azimuth_bins,
            range_bins,
            range_resolution_m,
            azimuth_start_deg,
            azimuth_step_deg,
        )?;
        *slot = Box::into_raw(Box::new(RkPolarImage(img)));
        Ok(())
    })
}

/// Load a polar scan (payload + JSON sidecar) from disk.
#[no_mangle]
pub unsafe extern "C" fn rk_polar_image_load(
    path: *const c_char,
    out: *mut *mut RkPolarImage,
) -> RkStatus {
    let slot = out_param!(out);
    guarded(|| {
        let img = radarkit::io::load_scan(unsafe { path_arg(path) }?)?;
        *slot = Box::into_raw(Box::new(RkPolarImage(img)));
        Ok(())
    })
}

/// Write a polar scan and its sidecar to disk.
#[no_mangle]
pub unsafe extern "C" fn rk_polar_image_save(
    img: *const RkPolarImage,
    path: *const c_char,
) -> RkStatus {
    let img = nonnull!(img);
    guarded(|| radarkit::io::save_scan(&img.0, unsafe { path_arg(path) }?))
}

#[no_mangle]
pub unsafe extern "C" fn rk_polar_image_azimuth_bins(img: *const RkPolarImage) -> usize {
    unsafe { img.as_ref() }.map_or(0, |i| i.0.azimuth_bins())
}

#[no_mangle]
pub unsafe extern "C" fn rk_polar_image_range_bins(img: *const RkPolarImage) -> usize {
    unsafe { img.as_ref() }.map_or(0, |i| i.0.range_bins())
}

/// Copy the full grid into `buffer` (length `azimuth_bins * range_bins`).
#[no_mangle]
pub unsafe extern "C" fn rk_polar_image_copy_data(
    img: *const RkPolarImage,
    buffer: *mut f64,
    buffer_len: usize,
) -> RkStatus {
    let img = nonnull!(img);
    if buffer.is_null() {
        set_error("null buffer");
        return RkStatus::NullPointer;
    }
    let data = img.0.data();
    if buffer_len != data.len() {
        set_error("buffer length does not match the grid");
        return RkStatus::InvalidArgument;
    }
    unsafe { std::slice::from_raw_parts_mut(buffer, buffer_len) }.copy_from_slice(data);
    RkStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn rk_polar_image_free(img: *mut RkPolarImage) {
    if !img.is_null() {
        drop(unsafe { Box::from_raw(img) });
    }
}

// ---------------------------------------------------------------------------
// Cartesian image handles
// ---------------------------------------------------------------------------

/// Wrap a row-major buffer of `width * height` dB samples.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn rk_cartesian_image_new(
    data: *const f64,
    width: usize,
    height: usize,
    meters_per_pixel: f64,
    origin_x_m: f64,
    origin_y_m: f64,
    sensor_x_m: f64,
    sensor_y_m: f64,
    out: *mut *mut RkCartesianImage,
) -> RkStatus {
    let slot = out_param!(out);
    if data.is_null() {
        set_error("null data pointer");
        return RkStatus::NullPointer;
    }
    let values = unsafe { std::slice::from_raw_parts(data, width * height) }.to_vec();
    guarded(|| {
        let img = CartesianImage::new(
            values,
            width,
            height,
            meters_per_pixel,
            origin_x_m,
            origin_y_m,
            sensor_x_m,
            sensor_y_m,
        )?;
        *slot = Box::into_raw(Box::new(RkCartesianImage(img)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rk_cartesian_image_load(
    path: *const c_char,
    out: *mut *mut RkCartesianImage,
) -> RkStatus {
    let slot = out_param!(out);
    guarded(|| {
        let img = radarkit::io::load_cartesian_scan(unsafe { path_arg(path) }?)?;
        *slot = Box::into_raw(Box::new(RkCartesianImage(img)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rk_cartesian_image_save(
    img: *const RkCartesianImage,
    path: *const c_char,
) -> RkStatus {
    let img = nonnull!(img);
    guarded(|| radarkit::io::save_cartesian_scan(&img.0, unsafe { path_arg(path) }?))
}

#[no_mangle]
pub unsafe extern "C" fn rk_cartesian_image_width(img: *const RkCartesianImage) -> usize {
    unsafe { img.as_ref() }.map_or(0, |i| i.0.width())
}

#[no_mangle]
pub unsafe extern "C" fn rk_cartesian_image_height(img: *const RkCartesianImage) -> usize {
    unsafe { img.as_ref() }.map_or(0, |i| i.0.height())
}

#[no_mangle]
pub unsafe extern "C" fn rk_cartesian_image_meters_per_pixel(img: *const RkCartesianImage) -> f64 {
    unsafe { img.as_ref() }.map_or(0.0, |i| i.0.meters_per_pixel)
}

/// Copy the full grid into `buffer` (length `width * height`).
#[no_mangle]
pub unsafe extern "C" fn rk_cartesian_image_copy_data(
    img: *const RkCartesianImage,
    buffer: *mut f64,
    buffer_len: usize,
) -> RkStatus {
    let img = nonnull!(img);
    if buffer.is_null() {
        set_error("null buffer");
        return RkStatus::NullPointer;
    }
    let data = img.0.data();
    if buffer_len != data.len() {
        set_error("buffer length does not match the grid");
        return RkStatus::InvalidArgument;
    }
    unsafe { std::slice::from_raw_parts_mut(buffer, buffer_len) }.copy_from_slice(data);
    RkStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn rk_cartesian_image_free(img: *mut RkCartesianImage) {
    if !img.is_null() {
        drop(unsafe { Box::from_raw(img) });
    }
}

// ---------------------------------------------------------------------------
// Remapping and augmentation
// ---------------------------------------------------------------------------

/// Resample a polar scan onto a uniform metric grid.
#[no_mangle]
pub unsafe extern "C" fn rk_polar_to_cartesian(
    img: *const RkPolarImage,
    meters_per_pixel: f64,
    interp: RkInterp,
    fill_db: f64,
    out: *mut *mut RkCartesianImage,
) -> RkStatus {
    let img = nonnull!(img);
    let slot = out_param!(out);
    guarded(|| {
        let cart = polar_to_cartesian(&img.0, meters_per_pixel, interp.into(), fill_db)?;
        *slot = Box::into_raw(Box::new(RkCartesianImage(cart)));
        Ok(())
    })
}

/// Sample a Cartesian image back onto a sensor's polar grid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn rk_cartesian_to_polar(
    img: *const RkCartesianImage,
    bandwidth_hz: f64,
    azimuth_beamwidth_deg: f64,
    azimuth_step_deg: f64,
    range_bins: usize,
    azimuth_bins: usize,
    interp: RkInterp,
    fill_db: f64,
    out: *mut *mut RkPolarImage,
) -> RkStatus {
    let img = nonnull!(img);
    let slot = out_param!(out);
    guarded(|| {
        let sensor = SensorConfig::from_bandwidth(
            bandwidth_hz,
            azimuth_beamwidth_deg,
            azimuth_step_deg,
            range_bins,
            azimuth_bins,
        )?;
        let polar = cartesian_to_polar(&img.0, &sensor, interp.into(), fill_db)?;
        *slot = Box::into_raw(Box::new(RkPolarImage(polar)));
        Ok(())
    })
}

/// Multiplicative speckle noise with a per-image variance drawn uniformly
/// from `[sigma_sq_min, sigma_sq_max]`, seeded and reproducible.
#[no_mangle]
pub unsafe extern "C" fn rk_speckle(
    img: *const RkCartesianImage,
    seed: u64,
    sigma_sq_min: f64,
    sigma_sq_max: f64,
    out: *mut *mut RkCartesianImage,
) -> RkStatus {
    let img = nonnull!(img);
    let slot = out_param!(out);
    guarded(|| {
        let noisy = speckle(&img.0, &mut seeded_rng(seed), sigma_sq_min, sigma_sq_max)?;
        *slot = Box::into_raw(Box::new(RkCartesianImage(noisy)));
        Ok(())
    })
}

/// Add `delta_db` to every pixel at or below `threshold_db`; pixels above
/// it (the object) are copied bit-identically.
#[no_mangle]
pub unsafe extern "C" fn rk_background_shift(
    img: *const RkCartesianImage,
    threshold_db: f64,
    delta_db: f64,
    out: *mut *mut RkCartesianImage,
) -> RkStatus {
    let img = nonnull!(img);
    let slot = out_param!(out);
    guarded(|| {
        let mask = segment_threshold(&img.0, threshold_db);
        let shifted = background_shift(&img.0, &mask, delta_db)?;
        *slot = Box::into_raw(Box::new(RkCartesianImage(shifted)));
        Ok(())
    })
}

/// Mean absolute per-pixel difference between two congruent images.
#[no_mangle]
pub unsafe extern "C" fn rk_msad(
    a: *const RkCartesianImage,
    b: *const RkCartesianImage,
    out: *mut f64,
) -> RkStatus {
    let a = nonnull!(a);
    let b = nonnull!(b);
    let slot = out_param!(out);
    guarded(|| {
        *slot = msad(&a.0, &b.0, None)?;
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Detection
// ---------------------------------------------------------------------------

/// CFAR + DBSCAN detection on a polar scan. Boxes come back as a JSON array
/// of `{class, score, x, y, width, height}` objects; free the string with
/// `rk_string_free`. `cfar_mode` 0 means the rate is a design false-alarm
/// probability, 1 means it is the threshold ratio itself.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn rk_detect(
    img: *const RkPolarImage,
    cfar_train_cells: usize,
    cfar_guard_cells: usize,
    cfar_rate: f64,
    cfar_mode: u32,
    dbscan_eps_m: f64,
    dbscan_min_pts: usize,
    box_side_px: usize,
    patch_side_px: usize,
    fill_db: f64,
    out_json: *mut *mut c_char,
) -> RkStatus {
    let img = nonnull!(img);
    let slot = out_param!(out_json);
    guarded(|| {
        let params = PipelineParams {
            cfar: CfarParams {
                train_cells: cfar_train_cells,
                guard_cells: cfar_guard_cells,
                rate: cfar_rate,
                mode: if cfar_mode == 0 {
                    CfarMode::Pfa
                } else {
                    CfarMode::Scale
                },
            },
            dbscan: DbscanParams {
                eps_m: dbscan_eps_m,
                min_pts: dbscan_min_pts,
            },
            box_side_px,
            patch_side_px,
            meters_per_pixel: None,
            interp: InterpMethod::Bilinear,
            fill_db,
        };
        let classifier = SingleClassClassifier::new("target");
        let output = detect_pipeline(&img.0, &params, &classifier)?;
        let json = serde_json::to_string(&output.boxes)?;
        let cstring = CString::new(json)
            .map_err(|_| Error::InvalidInput("JSON contained a NUL byte".into()))?;
        *slot = cstring.into_raw();
        Ok(())
    })
}

/// Free a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn rk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn scalar_helpers_round_trip() {
        unsafe {
            let mut out = 0.0f64;
            assert_eq!(rk_range_resolution(20e9, &mut out), RkStatus::Ok);
            assert!((out - 0.0075).abs() < 1e-5);
            assert_eq!(rk_range_resolution(-1.0, &mut out), RkStatus::Domain);
            let msg = CStr::from_ptr(rk_last_error_message());
            assert!(msg.to_str().unwrap().contains("bandwidth"));

            assert_eq!(rk_cross_range_cell_size(10.0, 1.2, &mut out), RkStatus::Ok);
            assert!((out - 0.2094).abs() < 5e-4);

            assert_eq!(
                rk_iou(0.0, 0.0, 2.0, 2.0, 1.0, 1.0, 2.0, 2.0, &mut out),
                RkStatus::Ok
            );
            assert_eq!(out, 1.0 / 7.0);
        }
    }

    #[test]
    fn image_handles_round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.bin");
        let c_path = CString::new(path.to_str().unwrap()).unwrap();

        let data: Vec<f64> = (0..12 * 16).map(|i| -40.0 + (i % 7) as f64).collect();
        unsafe {
            let mut img: *mut RkPolarImage = ptr::null_mut();
            let status = rk_polar_image_new(data.as_ptr(), 12, 16, 0.05, -5.5, 1.0, &mut img);
            assert_eq!(status, RkStatus::Ok);
            assert_eq!(rk_polar_image_azimuth_bins(img), 12);
            assert_eq!(rk_polar_image_range_bins(img), 16);

            assert_eq!(rk_polar_image_save(img, c_path.as_ptr()), RkStatus::Ok);
            let mut back: *mut RkPolarImage = ptr::null_mut();
            assert_eq!(
                rk_polar_image_load(c_path.as_ptr(), &mut back),
                RkStatus::Ok
            );
            let mut copy = vec![0.0f64; 12 * 16];
            assert_eq!(
                rk_polar_image_copy_data(back, copy.as_mut_ptr(), copy.len()),
                RkStatus::Ok
            );
            assert_eq!(copy, data);

            rk_polar_image_free(img);
            rk_polar_image_free(back);
        }
    }

    #[test]
    fn remap_and_augment_through_the_abi() {
        let data = vec![-40.0f64; 61 * 120];
        unsafe {
            let mut polar: *mut RkPolarImage = ptr::null_mut();
            assert_eq!(
                rk_polar_image_new(data.as_ptr(), 61, 120, 0.05, -30.0, 1.0, &mut polar),
                RkStatus::Ok
            );

            let mut cart: *mut RkCartesianImage = ptr::null_mut();
            assert_eq!(
                rk_polar_to_cartesian(polar, 0.05, RkInterp::Bilinear, -100.0, &mut cart),
                RkStatus::Ok
            );
            assert!(rk_cartesian_image_width(cart) > 0);

            let mut noisy: *mut RkCartesianImage = ptr::null_mut();
            assert_eq!(rk_speckle(cart, 7, 0.01, 0.15, &mut noisy), RkStatus::Ok);
            let mut same: *mut RkCartesianImage = ptr::null_mut();
            assert_eq!(rk_speckle(cart, 7, 0.01, 0.15, &mut same), RkStatus::Ok);
            let mut d = -1.0f64;
            assert_eq!(rk_msad(noisy, same, &mut d), RkStatus::Ok);
            assert_eq!(d, 0.0);

            let mut shifted: *mut RkCartesianImage = ptr::null_mut();
            assert_eq!(
                rk_background_shift(cart, -20.0, 3.0, &mut shifted),
                RkStatus::Ok
            );

            rk_cartesian_image_free(shifted);
            rk_cartesian_image_free(same);
            rk_cartesian_image_free(noisy);
            rk_cartesian_image_free(cart);
            rk_polar_image_free(polar);
        }
    }

    #[test]
    fn detection_returns_box_json() {
        // Flat floor with one bright block: one cluster, one box.
        let mut data = vec![-40.0f64; 81 * 200];
        for j in 38..43 {
            for k in 98..103 {
                data[j * 200 + k] = 0.0;
            }
        }
        let text = unsafe {
            let mut polar: *mut RkPolarImage = ptr::null_mut();
            assert_eq!(
                rk_polar_image_new(data.as_ptr(), 81, 200, 0.05, -20.0, 0.5, &mut polar),
                RkStatus::Ok
            );
            let mut json: *mut c_char = ptr::null_mut();
            let status = rk_detect(polar, 32, 4, 8.0, 1, 0.3, 4, 41, 32, -120.0, &mut json);
            assert_eq!(status, RkStatus::Ok);
            let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
            rk_string_free(json);
            rk_polar_image_free(polar);
            text
        };

        let boxes: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
        assert_eq!(boxes.len(), 1, "{text}");
        assert_eq!(boxes[0]["class"], "target");
        assert_eq!(boxes[0]["width"], 41.0);
    }

    #[test]
    fn null_pointers_are_reported_not_crashed() {
        unsafe {
            let mut out = 0.0f64;
            assert_eq!(
                rk_msad(ptr::null(), ptr::null(), &mut out),
                RkStatus::NullPointer
            );
            assert_eq!(rk_polar_image_azimuth_bins(ptr::null()), 0);
            rk_polar_image_free(ptr::null_mut());
            rk_string_free(ptr::null_mut());
        }
    }
}
