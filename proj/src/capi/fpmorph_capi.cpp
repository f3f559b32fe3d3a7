#include "fpmorph.h"

#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>

#include "cvt.hpp"
#include "media.hpp"
#include "pipeline.hpp"
#include "report.hpp"
#include "sphere_geometry.hpp"

using fpmorph::ConvergenceReport;
using fpmorph::SphereTessellation;

struct fpm_tessellation {
  SphereTessellation tess;
};

struct fpm_report {
  ConvergenceReport report;
};

namespace {

thread_local std::string g_last_error;

fpm_status fail(fpm_status code, const char* msg) {
  g_last_error = msg;
  return code;
}

// Runs fn() and maps exceptions onto status codes.
template <typename Fn>
fpm_status guarded(Fn&& fn) {
  try {
    fn();
    return FPM_OK;
  } catch (const std::invalid_argument& e) {
    return fail(FPM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::runtime_error& e) {
    return fail(FPM_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(FPM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FPM_ERR_INTERNAL, e.what());
  }
}

fpm_status require(bool ok, const char* msg) {
  return ok ? FPM_OK : fail(FPM_ERR_INVALID_ARGUMENT, msg);
}

}  // namespace

const char* fpm_last_error(void) { return g_last_error.c_str(); }

fpm_status fpm_tessellate(int n_points, int lloyd_iterations, uint64_t seed,
                          fpm_tessellation** out) {
  if (require(out != nullptr, "null output handle") != FPM_OK) return FPM_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    auto handle = new fpm_tessellation{fpmorph::cvt_sphere(n_points, lloyd_iterations, seed)};
    *out = handle;
  });
}

fpm_status fpm_tessellation_load(const char* path, fpm_tessellation** out) {
  if (require(out != nullptr && path != nullptr, "null argument") != FPM_OK) {
    return FPM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] { *out = new fpm_tessellation{fpmorph::load_tessellation(path)}; });
}

fpm_status fpm_tessellation_save(const fpm_tessellation* tess, const char* path) {
  if (require(tess != nullptr && path != nullptr, "null argument") != FPM_OK) {
    return FPM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] { fpmorph::save_tessellation(tess->tess, path); });
}

int fpm_tessellation_size(const fpm_tessellation* tess) {
  return tess ? tess->tess.size() : 0;
}

fpm_status fpm_tessellation_point(const fpm_tessellation* tess, int index, double xyz[3]) {
  if (require(tess != nullptr && xyz != nullptr, "null argument") != FPM_OK) {
    return FPM_ERR_INVALID_ARGUMENT;
  }
  if (require(index >= 0 && index < tess->tess.size(), "cell index out of range") != FPM_OK) {
    return FPM_ERR_INVALID_ARGUMENT;
  }
  const auto& p = tess->tess.points[std::size_t(index)];
  xyz[0] = p.x;
  xyz[1] = p.y;
  xyz[2] = p.z;
  return FPM_OK;
}

fpm_status fpm_tessellation_cell_area(const fpm_tessellation* tess, int index, double* area) {
  if (require(tess != nullptr && area != nullptr, "null argument") != FPM_OK) {
    return FPM_ERR_INVALID_ARGUMENT;
  }
  if (require(index >= 0 && index < tess->tess.size(), "cell index out of range") != FPM_OK) {
    return FPM_ERR_INVALID_ARGUMENT;
  }
  *area = tess->tess.cell_area[std::size_t(index)];
  return FPM_OK;
}

double fpm_tessellation_area_stddev(const fpm_tessellation* tess) {
  return tess ? tess->tess.area_stddev() : 0.0;
}

void fpm_tessellation_free(fpm_tessellation* tess) { delete tess; }

fpm_status fpm_rasterize_mask(const fpm_tessellation* tess, const char* mask_png,
                              double threshold, const char* out_levels_path) {
  if (require(tess != nullptr && mask_png != nullptr && out_levels_path != nullptr,
              "null argument") != FPM_OK) {
    return FPM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const auto mask = fpmorph::read_png(mask_png);
    const auto levels = fpmorph::rasterize_levels(tess->tess, mask, threshold);
    fpmorph::write_levels(out_levels_path, levels);
  });
}

void fpm_grid_config_init(fpm_grid_config* cfg) {
  if (!cfg) return;
  std::memset(cfg, 0, sizeof *cfg);
  cfg->dt = 0.01;
  cfg->dx = 1e-4;
  cfg->dy = 1e-4;
  cfg->eps_floor = 1e-3;
  cfg->n_steps = 10000;
  cfg->frame_stride = 100;
  cfg->pi_s = 0.1;
  cfg->pi_b = 0.9;
  cfg->bisection_tol = 1e-6;
  cfg->linear_steps_per_round = 10;
  cfg->max_rounds = 50;
}

void fpm_sphere_config_init(fpm_sphere_config* cfg) {
  if (!cfg) return;
  std::memset(cfg, 0, sizeof *cfg);
  cfg->dt = 0.05;
  cfg->pi_s = 0.1;
  cfg->pi_b = 0.9;
  cfg->bisection_tol = 1e-6;
  cfg->n_steps = 10000;
  cfg->frame_stride = 100;
  cfg->ramp_schedule = 1;
  cfg->linear_steps_per_round = 10;
  cfg->max_rounds = 50;
  cfg->frame_width = 256;
  cfg->frame_height = 128;
}

namespace {

fpmorph::GridRunConfig to_grid_config(const fpm_grid_config* cfg) {
  if (!cfg || !cfg->initial_png || !cfg->target_png || !cfg->output_dir) {
    throw std::invalid_argument("grid config needs initial_png, target_png, and output_dir");
  }
  fpmorph::GridRunConfig out;
  out.initial_png = cfg->initial_png;
  out.target_png = cfg->target_png;
  out.output_dir = cfg->output_dir;
  out.dt = cfg->dt;
  out.dx = cfg->dx;
  out.dy = cfg->dy;
  out.eps_floor = cfg->eps_floor;
  out.n_steps = cfg->n_steps;
  out.frame_stride = cfg->frame_stride;
  out.pi_s = cfg->pi_s;
  out.pi_b = cfg->pi_b;
  out.bisection_tol = cfg->bisection_tol;
  out.linear_steps_per_round = cfg->linear_steps_per_round;
  out.max_rounds = cfg->max_rounds;
  return out;
}

fpmorph::SphereRunConfig to_sphere_config(const fpm_sphere_config* cfg) {
  if (!cfg || !cfg->initial_levels || !cfg->target_levels || !cfg->output_dir) {
    throw std::invalid_argument(
        "sphere config needs initial_levels, target_levels, and output_dir");
  }
  fpmorph::SphereRunConfig out;
  out.initial_levels = cfg->initial_levels;
  out.target_levels = cfg->target_levels;
  out.output_dir = cfg->output_dir;
  out.dt = cfg->dt;
  out.pi_s = cfg->pi_s;
  out.pi_b = cfg->pi_b;
  out.bisection_tol = cfg->bisection_tol;
  out.n_steps = cfg->n_steps;
  out.frame_stride = cfg->frame_stride;
  out.ramp_schedule = cfg->ramp_schedule != 0;
  out.linear_steps_per_round = cfg->linear_steps_per_round;
  out.max_rounds = cfg->max_rounds;
  out.frame_width = cfg->frame_width;
  out.frame_height = cfg->frame_height;
  return out;
}

}  // namespace

fpm_status fpm_run_grid(const fpm_grid_config* cfg, fpm_report** out) {
  if (require(out != nullptr, "null output handle") != FPM_OK) return FPM_ERR_INVALID_ARGUMENT;
  return guarded([&] { *out = new fpm_report{fpmorph::run_grid_pipeline(to_grid_config(cfg))}; });
}

fpm_status fpm_run_grid_sharp(const fpm_grid_config* cfg, fpm_report** out) {
  if (require(out != nullptr, "null output handle") != FPM_OK) return FPM_ERR_INVALID_ARGUMENT;
  return guarded(
      [&] { *out = new fpm_report{fpmorph::run_grid_sharp_pipeline(to_grid_config(cfg))}; });
}

fpm_status fpm_run_sphere(const fpm_tessellation* tess, const fpm_sphere_config* cfg,
                          fpm_report** out) {
  if (require(tess != nullptr && out != nullptr, "null argument") != FPM_OK) {
    return FPM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = new fpm_report{fpmorph::run_sphere_pipeline(tess->tess, to_sphere_config(cfg))};
  });
}

fpm_status fpm_run_sphere_sharp(const fpm_tessellation* tess, const fpm_sphere_config* cfg,
                                fpm_report** out) {
  if (require(tess != nullptr && out != nullptr, "null argument") != FPM_OK) {
    return FPM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = new fpm_report{fpmorph::run_sphere_sharp_pipeline(tess->tess, to_sphere_config(cfg))};
  });
}

int fpm_report_channels(const fpm_report* report) {
  return report ? int(report->report.channels.size()) : 0;
}

int64_t fpm_report_samples(const fpm_report* report) {
  return report ? int64_t(report->report.steps.size()) : 0;
}

int64_t fpm_report_total_steps(const fpm_report* report) {
  return report ? report->report.total_steps : 0;
}

namespace {

fpm_status check_channel(const fpm_report* report, int channel) {
  if (!report) return fail(FPM_ERR_INVALID_ARGUMENT, "null report");
  if (channel < 0 || channel >= int(report->report.channels.size())) {
    return fail(FPM_ERR_INVALID_ARGUMENT, "channel index out of range");
  }
  return FPM_OK;
}

}  // namespace

fpm_status fpm_report_error_at(const fpm_report* report, int channel, int64_t sample,
                               double* error) {
  fpm_status st = check_channel(report, channel);
  if (st != FPM_OK) return st;
  if (!error) return fail(FPM_ERR_INVALID_ARGUMENT, "null output pointer");
  const auto& errs = report->report.channels[std::size_t(channel)].errors;
  if (sample < 0 || sample >= int64_t(errs.size())) {
    return fail(FPM_ERR_INVALID_ARGUMENT, "sample index out of range");
  }
  *error = errs[std::size_t(sample)];
  return FPM_OK;
}

fpm_status fpm_report_initial_error(const fpm_report* report, int channel, double* error) {
  return fpm_report_error_at(report, channel, 0, error);
}

fpm_status fpm_report_final_error(const fpm_report* report, int channel, double* error) {
  fpm_status st = check_channel(report, channel);
  if (st != FPM_OK) return st;
  const auto& errs = report->report.channels[std::size_t(channel)].errors;
  return fpm_report_error_at(report, channel, int64_t(errs.size()) - 1, error);
}

fpm_status fpm_report_mass_scale(const fpm_report* report, int channel, double* scale) {
  fpm_status st = check_channel(report, channel);
  if (st != FPM_OK) return st;
  if (!scale) return fail(FPM_ERR_INVALID_ARGUMENT, "null output pointer");
  *scale = report->report.channels[std::size_t(channel)].mass_scale;
  return FPM_OK;
}

fpm_status fpm_report_fitted_rate(const fpm_report* report, int channel, double* rate,
                                  double* r_squared, int* valid_fit) {
  fpm_status st = check_channel(report, channel);
  if (st != FPM_OK) return st;
  if (!rate || !r_squared || !valid_fit) {
    return fail(FPM_ERR_INVALID_ARGUMENT, "null output pointer");
  }
  const auto& fit = report->report.channels[std::size_t(channel)].fit;
  *rate = fit.rate;
  *r_squared = fit.r_squared;
  *valid_fit = fit.valid && !fit.converged_series ? 1 : 0;
  return FPM_OK;
}

int64_t fpm_report_converged_round(const fpm_report* report) {
  if (!report || !report->report.converged) return -1;
  return report->report.converged_round;
}

int64_t fpm_report_converged_step(const fpm_report* report) {
  if (!report || !report->report.converged) return -1;
  return report->report.converged_step;
}

void fpm_report_free(fpm_report* report) { delete report; }

fpm_status fpm_grid_mu2(const char* target_png, double dt, double dx, double dy,
                        double eps_floor, double* mu2) {
  if (require(target_png != nullptr && mu2 != nullptr, "null argument") != FPM_OK) {
    return FPM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] { *mu2 = fpmorph::grid_mu2_from_png(target_png, dt, dx, dy, eps_floor); });
}

fpm_status fpm_sphere_mu2(const fpm_tessellation* tess, const char* target_levels, double pi_s,
                          double pi_b, double dt, double* mu2) {
  if (require(tess != nullptr && target_levels != nullptr && mu2 != nullptr, "null argument") !=
      FPM_OK) {
    return FPM_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *mu2 = fpmorph::sphere_mu2_from_levels(tess->tess, target_levels, pi_s, pi_b, dt);
  });
}
