/* SPDX-License-Identifier: Apache-2.0 */
#ifndef FIELDFUSE_FIELDFUSE_H
#define FIELDFUSE_FIELDFUSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(FIELDFUSE_BUILDING)
#define FF_API __declspec(dllexport)
#else
#define FF_API __declspec(dllimport)
#endif
#else
#define FF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ff_status {
  FF_OK = 0,
  FF_INVALID_ARGUMENT = 1,
  FF_BEHIND_CAMERA = 2,
  FF_INVALID_PIXEL = 3,
  FF_ALL_INVALID = 4,
  FF_SINGULAR_NORMAL_EQUATIONS = 5,
  FF_DIVERGED_MAX_ITER = 6,
  FF_DEGENERATE_LOOK_AT = 7,
  FF_TOO_FEW_POSES = 8,
  FF_DEGENERATE_BASELINE = 9,
  FF_ZERO_MASS = 10,
  FF_DIMENSION_MISMATCH = 11,
  FF_EMPTY_MASK = 12,
  FF_UNKNOWN_EXPERIMENT = 13,
  FF_INVALID_CONFIG = 14,
  FF_IO = 15,
  FF_INTERNAL = 99
} ff_status;

typedef enum ff_camera_kind {
  FF_CAMERA_PINHOLE = 0,
  FF_CAMERA_UCM = 1,
  FF_CAMERA_EUCM = 2,
  FF_CAMERA_DS = 3
} ff_camera_kind;

typedef struct ff_camera ff_camera;
typedef struct ff_field ff_field;

FF_API const char* ff_version(void);
FF_API const char* ff_status_name(ff_status status);

/* Message of the last failing call on this thread; empty after success. */
FF_API const char* ff_last_error(void);

/* Releases strings returned through char** out-parameters. NULL is ignored. */
FF_API void ff_string_free(char* s);

/* Camera. params: fx, fy, cx, cy, then alpha (UCM), alpha, beta (EUCM) or
   alpha, xi (DS). */
FF_API ff_status ff_camera_create(ff_camera_kind kind, const double* params, size_t count, ff_camera** out);
FF_API ff_status ff_camera_from_json(const char* json, ff_camera** out);
FF_API void ff_camera_destroy(ff_camera* camera);
FF_API ff_status ff_camera_params(const ff_camera* camera, double* params, size_t capacity, size_t* count);
FF_API ff_status ff_camera_project(const ff_camera* camera, const double point[3], double pixel[2]);
/* Point at distance `range` from the optical center along the pixel ray. */
FF_API ff_status ff_camera_unproject(const ff_camera* camera, const double pixel[2], double range, double point[3]);
/* d_point is 2x3 and d_params is 2 x count, both row-major. */
FF_API ff_status ff_camera_jacobians(const ff_camera* camera, const double point[3], double d_point[6],
                                     double* d_params, size_t capacity);

/* Field described by scene JSON. */
FF_API ff_status ff_field_from_json(const char* json, ff_field** out);
FF_API void ff_field_destroy(ff_field* field);
FF_API ff_status ff_field_render_ray(const ff_field* field, const double origin[3], const double direction[3],
                                     double t_near, double t_far, int samples, double rgb[3], double* depth,
                                     double* accumulation);
/* Renders width x height RGB (row-major, interleaved) for a world-from-camera
   pose given as a row-major rotation and a translation. */
FF_API ff_status ff_field_render(const ff_field* field, const ff_camera* camera, int width, int height,
                                 const double rotation[9], const double translation[3], int samples, double t_near,
                                 double t_far, double qd_cutoff, double* rgb, double* mean_distant_accumulation);

/* SIM(3) registration from [{"local": pose, "shared": pose}, ...]. */
FF_API ff_status ff_register_json(const char* correspondences_json, char** result_json);

/* Runs a CLI command; the report is also written to out_dir/report.json.
   config_json may be NULL or empty. */
FF_API ff_status ff_run_command(const char* name, const char* config_json, uint64_t seed, const char* out_dir,
                                char** report_json);

#ifdef __cplusplus
}
#endif

#endif
