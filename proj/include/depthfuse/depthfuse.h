/*
 * depthfuse C API.
 *
 * Every function returns a df_status. On failure a description of the most
 * recent error on the calling thread is available from df_last_error().
 * Handles are opaque; each *_create / *_load / *_from_* call must be paired
 * with the matching *_destroy.
 */
#ifndef DEPTHFUSE_DEPTHFUSE_H_
#define DEPTHFUSE_DEPTHFUSE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(DEPTHFUSE_BUILDING_LIBRARY)
#define DF_API __attribute__((visibility("default")))
#else
#define DF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum df_status {
  DF_OK = 0,
  DF_ERROR_CONFIG = 1,           /* invalid configuration or argument combination */
  DF_ERROR_IO = 2,               /* file could not be read or written */
  DF_ERROR_DOMAIN = 3,           /* numeric precondition violated */
  DF_ERROR_DATA = 4,             /* input data violates an evaluation precondition */
  DF_ERROR_INVALID_ARGUMENT = 5, /* null handle/pointer or bad buffer size */
  DF_ERROR_INTERNAL = 6
} df_status;

DF_API const char* df_version(void);

/* Message for the last failed call on this thread; "" if none. */
DF_API const char* df_last_error(void);

/* Field of the last DF_ERROR_CONFIG on this thread; "" if none. */
DF_API const char* df_last_error_field(void);

/* ---- distributions ------------------------------------------------------ */

DF_API df_status df_erf(double x, double* out);
DF_API df_status df_probit(double p, double* out);
DF_API df_status df_gaussian_pdf(double d, double mu, double sigma, double* out);
DF_API df_status df_consistency_threshold(double sigma, double kappa, double* out);
DF_API df_status df_nll(double d_gt, double mu, double sigma, double* out);

/* Writes n_samples offsets to out_b; out_p_star may be NULL. */
DF_API df_status df_bin_coefficients(int n_samples, double beta, double* out_b,
                                     double* out_p_star);

/* ---- geometry ----------------------------------------------------------- */

typedef struct df_intrinsics {
  double fx, fy, cx, cy;
  int width, height;
} df_intrinsics;

/* World-to-camera transform: row-major R (9 values) then t (3 values). */
typedef struct df_pose {
  double values[12];
} df_pose;

typedef struct df_projection {
  double u, v, depth;
  int in_frustum;
} df_projection;

DF_API df_status df_back_project(double u, double v, double d, const df_intrinsics* intrinsics,
                                 double out_point[3]);
DF_API df_status df_project_to_view(const double point_world[3], const df_pose* pose,
                                    const df_intrinsics* intrinsics, df_projection* out);
DF_API df_status df_roundtrip_candidate(double u, double v, double d, const df_pose* ref_pose,
                                        const df_intrinsics* ref_intrinsics,
                                        const df_pose* nbr_pose,
                                        const df_intrinsics* nbr_intrinsics, df_projection* out);

/* ---- Gaussian depth maps ------------------------------------------------ */

typedef struct df_depth_map df_depth_map;

DF_API df_status df_depth_map_create(int width, int height, df_depth_map** out);
DF_API void df_depth_map_destroy(df_depth_map* map);
DF_API df_status df_depth_map_size(const df_depth_map* map, int* width, int* height);

/* Row-major buffers of width*height doubles; either pointer may be NULL. */
DF_API df_status df_depth_map_set(df_depth_map* map, const double* mu, const double* sigma,
                                  size_t count);
DF_API df_status df_depth_map_get(const df_depth_map* map, double* mu, double* sigma,
                                  size_t count);

/* Reads/writes <stem>_mu.pfm and <stem>_sigma.pfm. */
DF_API df_status df_depth_map_load(const char* stem, df_depth_map** out);
DF_API df_status df_depth_map_save(const df_depth_map* map, const char* stem);

DF_API df_status df_depth_map_upsample(const df_depth_map* map, int factor, double sigma_min,
                                       df_depth_map** out);

/* ---- metrics ------------------------------------------------------------ */

typedef struct df_metrics {
  double abs_rel, sq_rel, abs_diff, rmse, rmse_log;
  double delta_1, delta_2, delta_3; /* percent */
  double nll;
  long long pixel_count;
} df_metrics;

/* gt: width*height doubles. mask: NULL or width*height bytes (nonzero =
 * evaluated). depth_cap <= 0 disables the cap. */
DF_API df_status df_compute_metrics(const df_depth_map* pred, const double* gt,
                                    const unsigned char* mask, size_t count, double depth_cap,
                                    df_metrics* out);

/* ---- experiments -------------------------------------------------------- */

typedef struct df_experiment df_experiment;

DF_API df_status df_experiment_from_json(const char* json_text, df_experiment** out);
DF_API df_status df_experiment_from_file(const char* path, df_experiment** out);
DF_API void df_experiment_destroy(df_experiment* experiment);

/* Overrides; each is recorded in the run manifest. */
DF_API df_status df_experiment_set_seed(df_experiment* experiment, uint64_t seed);
DF_API df_status df_experiment_set_arm(df_experiment* experiment, const char* arm);
DF_API df_status df_experiment_set_output_dir(df_experiment* experiment, const char* dir);
DF_API df_status df_experiment_set_axis(df_experiment* experiment, const char* axis,
                                        double value);

/* Copies the resolved config JSON into buf (NUL-terminated). *needed receives
 * the required size including the terminator; buf may be NULL to query it. */
DF_API df_status df_experiment_config_json(const df_experiment* experiment, char* buf,
                                           size_t size, size_t* needed);

/* Runs the experiment and writes artifacts to the output directory.
 * out_all may be NULL; it receives the whole-image metrics of the result. */
DF_API df_status df_experiment_run(df_experiment* experiment, int threads, int write_png,
                                   df_metrics* out_all);

/* Runs one experiment per value along axis (n_samples, n_iter, beta, kappa,
 * temperature) and writes <output_dir>/sweep.csv. */
DF_API df_status df_experiment_sweep(df_experiment* experiment, const char* axis,
                                     const double* values, size_t count, int threads,
                                     int write_png);

#ifdef __cplusplus
}
#endif

#endif /* DEPTHFUSE_DEPTHFUSE_H_ */
