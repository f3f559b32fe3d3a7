/* fpmorph: density inbetweening engine.
 *
 * Evolves an initial density field (an image, or a coloring of a point
 * cloud on the unit sphere) toward a prescribed equilibrium field through
 * mass-conserving diffusion dynamics, with an optional thresholding mode
 * that keeps two-valued fields sharp. The library writes PNG frame
 * sequences, a per-step error CSV, and a run report.
 *
 * All functions return FPM_OK (0) on success. On failure they return a
 * nonzero status and leave a human-readable message in fpm_last_error()
 * (thread-local). Out-parameters are untouched on failure. Handles are
 * opaque and owned by the caller via the matching *_free function.
 */
#ifndef FPMORPH_H
#define FPMORPH_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fpm_status {
  FPM_OK = 0,
  FPM_ERR_INVALID_ARGUMENT = 1, /* bad parameters, sizes, or numeric preconditions */
  FPM_ERR_IO = 2,               /* file read/write failure */
  FPM_ERR_INTERNAL = 3
} fpm_status;

const char* fpm_last_error(void);

/* ---- tessellations (point clouds on the unit sphere) ------------------- */

typedef struct fpm_tessellation fpm_tessellation;

/* Seeded uniform sample of n points followed by Lloyd iterations. */
fpm_status fpm_tessellate(int n_points, int lloyd_iterations, uint64_t seed,
                          fpm_tessellation** out);
fpm_status fpm_tessellation_load(const char* path, fpm_tessellation** out);
fpm_status fpm_tessellation_save(const fpm_tessellation* tess, const char* path);
int fpm_tessellation_size(const fpm_tessellation* tess);
fpm_status fpm_tessellation_point(const fpm_tessellation* tess, int index, double xyz[3]);
fpm_status fpm_tessellation_cell_area(const fpm_tessellation* tess, int index, double* area);
double fpm_tessellation_area_stddev(const fpm_tessellation* tess);
void fpm_tessellation_free(fpm_tessellation* tess);

/* Samples an equirectangular PNG mask at every generator and writes a
 * levels file ("<cell> <s|b>" lines): mask >= threshold maps to 'b'. */
fpm_status fpm_rasterize_mask(const fpm_tessellation* tess, const char* mask_png,
                              double threshold, const char* out_levels_path);

/* ---- runs --------------------------------------------------------------- */

typedef struct fpm_report fpm_report;

typedef struct fpm_grid_config {
  const char* initial_png;
  const char* target_png;
  const char* output_dir;
  double dt;
  double dx;
  double dy;
  double eps_floor; /* positivity floor applied to pixel values */
  int64_t n_steps;
  int64_t frame_stride;
  /* sharp mode only */
  double pi_s;
  double pi_b;
  double bisection_tol;
  int linear_steps_per_round;
  int max_rounds;
} fpm_grid_config;

/* Fills a config with the default parameters. */
void fpm_grid_config_init(fpm_grid_config* cfg);

fpm_status fpm_run_grid(const fpm_grid_config* cfg, fpm_report** out);
fpm_status fpm_run_grid_sharp(const fpm_grid_config* cfg, fpm_report** out);

typedef struct fpm_sphere_config {
  const char* initial_levels;
  const char* target_levels;
  const char* output_dir;
  double dt;
  double pi_s;
  double pi_b;
  double bisection_tol;
  int64_t n_steps;
  int64_t frame_stride;
  int ramp_schedule; /* nonzero: 2k linear steps in round k; zero: constant */
  int linear_steps_per_round;
  int max_rounds;
  int frame_width;
  int frame_height;
} fpm_sphere_config;

void fpm_sphere_config_init(fpm_sphere_config* cfg);

fpm_status fpm_run_sphere(const fpm_tessellation* tess, const fpm_sphere_config* cfg,
                          fpm_report** out);
fpm_status fpm_run_sphere_sharp(const fpm_tessellation* tess, const fpm_sphere_config* cfg,
                                fpm_report** out);

/* ---- report accessors --------------------------------------------------- */

int fpm_report_channels(const fpm_report* report);
int64_t fpm_report_samples(const fpm_report* report);
int64_t fpm_report_total_steps(const fpm_report* report);
fpm_status fpm_report_error_at(const fpm_report* report, int channel, int64_t sample,
                               double* error);
fpm_status fpm_report_initial_error(const fpm_report* report, int channel, double* error);
fpm_status fpm_report_final_error(const fpm_report* report, int channel, double* error);
fpm_status fpm_report_mass_scale(const fpm_report* report, int channel, double* scale);
/* valid_fit is 0 when the series was too short or already converged. */
fpm_status fpm_report_fitted_rate(const fpm_report* report, int channel, double* rate,
                                  double* r_squared, int* valid_fit);
/* Sharp runs: converged round, or -1 when the run did not converge. */
int64_t fpm_report_converged_round(const fpm_report* report);
int64_t fpm_report_converged_step(const fpm_report* report);
void fpm_report_free(fpm_report* report);

/* ---- spectral oracle ----------------------------------------------------- */

/* Second-largest eigenvalue magnitude of the dense iteration matrix built
 * from the target. Capped at 2500 unknowns. */
fpm_status fpm_grid_mu2(const char* target_png, double dt, double dx, double dy,
                        double eps_floor, double* mu2);
fpm_status fpm_sphere_mu2(const fpm_tessellation* tess, const char* target_levels, double pi_s,
                          double pi_b, double dt, double* mu2);

#ifdef __cplusplus
}
#endif

#endif /* FPMORPH_H */
