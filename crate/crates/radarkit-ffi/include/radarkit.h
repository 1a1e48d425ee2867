#ifndef RADARKIT_H
#define RADARKIT_H

/* Generated by cbindgen from radarkit-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible API call.
 */
typedef enum RkStatus {
  RK_STATUS_OK = 0,
  RK_STATUS_NULL_POINTER = 1,
  RK_STATUS_INVALID_ARGUMENT = 2,
  RK_STATUS_DOMAIN = 3,
  RK_STATUS_EMPTY_SELECTION = 4,
  RK_STATUS_SINGULAR_FIT = 5,
  RK_STATUS_UNKNOWN_CLASS = 6,
  RK_STATUS_FORMAT = 7,
  RK_STATUS_IO = 8,
  RK_STATUS_PANIC = 9,
} RkStatus;

/**
 * Interpolation selector for grid remapping.
 */
typedef enum RkInterp {
  RK_INTERP_NEAREST = 0,
  RK_INTERP_BILINEAR = 1,
} RkInterp;

/**
 * Opaque Cartesian image handle.
 */
typedef struct RkCartesianImage RkCartesianImage;

/**
 * Opaque polar scan handle.
 */
typedef struct RkPolarImage RkPolarImage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string.
 */
const char *rk_version(void);

/**
 * Message for the last error on this thread. Valid until the next failing
 * call from the same thread.
 */
const char *rk_last_error_message(void);

/**
 * Range resolution `c / (2B)` in meters.
 */
enum RkStatus rk_range_resolution(double bandwidth_hz, double *out_m);

/**
 * Cross-range cell size `2R sin(theta/2)` in meters.
 */
enum RkStatus rk_cross_range_cell_size(double range_m, double beamwidth_deg, double *out_m);

/**
 * Intersection-over-union of two pixel boxes.
 */
enum RkStatus rk_iou(double ax,
                     double ay,
                     double aw,
                     double ah,
                     double bx,
                     double by,
                     double bw,
                     double bh,
                     double *out);

/**
 * Wrap an azimuth-major buffer of `azimuth_bins * range_bins` dB samples.
 */
enum RkStatus rk_polar_image_new(const double *data,
                                 uintptr_t azimuth_bins,
                                 uintptr_t range_bins,
                                 double range_resolution_m,
                                 double azimuth_start_deg,
                                 double azimuth_step_deg,
                                 struct RkPolarImage **out);

/**
 * Load a polar scan (payload + JSON sidecar) from disk.
 */
enum RkStatus rk_polar_image_load(const char *path, struct RkPolarImage **out);

/**
 * Write a polar scan and its sidecar to disk.
 */
enum RkStatus rk_polar_image_save(const struct RkPolarImage *img, const char *path);

uintptr_t rk_polar_image_azimuth_bins(const struct RkPolarImage *img);

uintptr_t rk_polar_image_range_bins(const struct RkPolarImage *img);

/**
 * Copy the full grid into `buffer` (length `azimuth_bins * range_bins`).
 */
enum RkStatus rk_polar_image_copy_data(const struct RkPolarImage *img,
                                       double *buffer,
                                       uintptr_t buffer_len);

void rk_polar_image_free(struct RkPolarImage *img);

/**
 * Wrap a row-major buffer of `width * height` dB samples.
 */
enum RkStatus rk_cartesian_image_new(const double *data,
                                     uintptr_t width,
                                     uintptr_t height,
                                     double meters_per_pixel,
                                     double origin_x_m,
                                     double origin_y_m,
                                     double sensor_x_m,
                                     double sensor_y_m,
                                     struct RkCartesianImage **out);

enum RkStatus rk_cartesian_image_load(const char *path, struct RkCartesianImage **out);

enum RkStatus rk_cartesian_image_save(const struct RkCartesianImage *img, const char *path);

uintptr_t rk_cartesian_image_width(const struct RkCartesianImage *img);

uintptr_t rk_cartesian_image_height(const struct RkCartesianImage *img);

double rk_cartesian_image_meters_per_pixel(const struct RkCartesianImage *img);

/**
 * Copy the full grid into `buffer` (length `width * height`).
 */
enum RkStatus rk_cartesian_image_copy_data(const struct RkCartesianImage *img,
                                           double *buffer,
                                           uintptr_t buffer_len);

void rk_cartesian_image_free(struct RkCartesianImage *img);

/**
 * Resample a polar scan onto a uniform metric grid.
 */
enum RkStatus rk_polar_to_cartesian(const struct RkPolarImage *img,
                                    double meters_per_pixel,
                                    enum RkInterp interp,
                                    double fill_db,
                                    struct RkCartesianImage **out);

/**
 * Sample a Cartesian image back onto a sensor's polar grid.
 */
enum RkStatus rk_cartesian_to_polar(const struct RkCartesianImage *img,
                                    double bandwidth_hz,
                                    double azimuth_beamwidth_deg,
                                    double azimuth_step_deg,
                                    uintptr_t range_bins,
                                    uintptr_t azimuth_bins,
                                    enum RkInterp interp,
                                    double fill_db,
                                    struct RkPolarImage **out);

/**
 * Multiplicative speckle noise with a per-image variance drawn uniformly
 * from `[sigma_sq_min, sigma_sq_max]`, seeded and reproducible.
 */
enum RkStatus rk_speckle(const struct RkCartesianImage *img,
                         uint64_t seed,
                         double sigma_sq_min,
                         double sigma_sq_max,
                         struct RkCartesianImage **out);

/**
 * Add `delta_db` to every pixel at or below `threshold_db`; pixels above
 * it (the object) are copied bit-identically.
 */
enum RkStatus rk_background_shift(const struct RkCartesianImage *img,
                                  double threshold_db,
                                  double delta_db,
                                  struct RkCartesianImage **out);

/**
 * Mean absolute per-pixel difference between two congruent images.
 */
enum RkStatus rk_msad(const struct RkCartesianImage *a,
                      const struct RkCartesianImage *b,
                      double *out);

/**
 * CFAR + DBSCAN detection on a polar scan. Boxes come back as a JSON array
 * of `{class, score, x, y, width, height}` objects; free the string with
 * `rk_string_free`. `cfar_mode` 0 means the rate is a design false-alarm
 * probability, 1 means it is the threshold ratio itself.
 */
enum RkStatus rk_detect(const struct RkPolarImage *img,
                        uintptr_t cfar_train_cells,
                        uintptr_t cfar_guard_cells,
                        double cfar_rate,
                        uint32_t cfar_mode,
                        double dbscan_eps_m,
                        uintptr_t dbscan_min_pts,
                        uintptr_t box_side_px,
                        uintptr_t patch_side_px,
                        double fill_db,
                        char **out_json);

/**
 * Free a string returned by this library.
 */
void rk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADARKIT_H */
