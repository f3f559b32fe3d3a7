// morph: drive a density field from an initial image (or sphere coloring)
// to a target equilibrium and write the inbetween frames.

#include <cinttypes>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "fpmorph.h"

namespace {

int fail_run(fpm_status) {
  std::fprintf(stderr, "error: %s\n", fpm_last_error());
  return 1;
}

void print_report(const fpm_report* report, bool sharp) {
  const int channels = fpm_report_channels(report);
  for (int c = 0; c < channels; ++c) {
    double e0 = 0.0, e1 = 0.0, scale = 1.0, rate = 0.0, r2 = 0.0;
    int valid = 0;
    fpm_report_initial_error(report, c, &e0);
    fpm_report_final_error(report, c, &e1);
    fpm_report_mass_scale(report, c, &scale);
    fpm_report_fitted_rate(report, c, &rate, &r2, &valid);
    std::printf("channel %d: initial_error=%.6g final_error=%.6g mass_scale=%.6g", c, e0, e1,
                scale);
    if (valid) std::printf(" rate=%.6g r2=%.4f", rate, r2);
    std::printf("\n");
  }
  if (sharp) {
    const int64_t round = fpm_report_converged_round(report);
    if (round >= 0) {
      std::printf("converged at round %" PRId64 " (step %" PRId64 ")\n", round,
                  fpm_report_converged_step(report));
    } else {
      std::printf("did not converge within the round budget\n");
    }
  }
  std::printf("total steps: %" PRId64 "\n", fpm_report_total_steps(report));
}

struct TessHandle {
  fpm_tessellation* t = nullptr;
  ~TessHandle() { fpm_tessellation_free(t); }
};

struct ReportHandle {
  fpm_report* r = nullptr;
  ~ReportHandle() { fpm_report_free(r); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"density inbetweening engine"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read defaults from an INI/TOML file (flags override)");

  fpm_grid_config gc;
  fpm_grid_config_init(&gc);
  fpm_sphere_config sc;
  fpm_sphere_config_init(&sc);

  std::string init_path, target_path, out_dir, tess_path, mask_path, mode;
  double threshold = 0.5;
  double dt = gc.dt, dx = gc.dx, dy = gc.dy, eps_floor = gc.eps_floor;
  double pi_s = 0.1, pi_b = 0.9, bisection_tol = 1e-6;
  std::int64_t steps = gc.n_steps, stride = gc.frame_stride;
  int linear_steps = 10, max_rounds = 50, frame_w = 256, frame_h = 128;
  std::string schedule = "ramp";
  int n_points = 3000, iterations = 100;
  std::uint64_t seed = 0;

  auto add_grid_flags = [&](CLI::App* cmd) {
    cmd->add_option("--init", init_path, "initial image (PNG)")->required();
    cmd->add_option("--target", target_path, "target equilibrium image (PNG)")->required();
    cmd->add_option("--out", out_dir, "output directory")->required();
    cmd->add_option("--dt", dt, "time step");
    cmd->add_option("--dx", dx, "cell width");
    cmd->add_option("--dy", dy, "cell height");
    cmd->add_option("--eps-floor", eps_floor, "positivity floor for pixel values");
    cmd->add_option("--stride", stride, "frame emission stride");
  };
  auto add_sphere_flags = [&](CLI::App* cmd) {
    cmd->add_option("--tess", tess_path, "tessellation cache file")->required();
    cmd->add_option("--init", init_path, "initial levels file")->required();
    cmd->add_option("--target", target_path, "target levels file")->required();
    cmd->add_option("--out", out_dir, "output directory")->required();
    cmd->add_option("--dt", dt, "time step");
    cmd->add_option("--pi-s", pi_s, "small level value");
    cmd->add_option("--pi-b", pi_b, "large level value");
    cmd->add_option("--stride", stride, "frame emission stride");
    cmd->add_option("--frame-width", frame_w, "frame width in pixels");
    cmd->add_option("--frame-height", frame_h, "frame height in pixels");
  };

  CLI::App* grid = app.add_subcommand("grid", "evolve one image toward another");
  add_grid_flags(grid);
  grid->add_option("--steps", steps, "number of explicit steps");

  CLI::App* grid_sharp =
      app.add_subcommand("grid-sharp", "two-valued image dynamics with thresholding");
  add_grid_flags(grid_sharp);
  grid_sharp->add_option("--pi-s", pi_s, "small level value");
  grid_sharp->add_option("--pi-b", pi_b, "large level value");
  grid_sharp->add_option("--bisection-tol", bisection_tol, "bisection bracket tolerance");
  grid_sharp->add_option("--linear-steps", linear_steps, "linear steps per round");
  grid_sharp->add_option("--max-rounds", max_rounds, "projection round budget");

  CLI::App* sphere = app.add_subcommand("sphere", "evolve a sphere coloring toward another");
  add_sphere_flags(sphere);
  sphere->add_option("--steps", steps, "number of explicit steps");

  CLI::App* sphere_sharp =
      app.add_subcommand("sphere-sharp", "sphere coloring dynamics with thresholding");
  add_sphere_flags(sphere_sharp);
  sphere_sharp->add_option("--bisection-tol", bisection_tol, "bisection bracket tolerance");
  sphere_sharp->add_option("--schedule", schedule, "ramp (2k steps in round k) or constant");
  sphere_sharp->add_option("--linear-steps", linear_steps,
                           "linear steps per round (constant schedule)");
  sphere_sharp->add_option("--max-rounds", max_rounds, "projection round budget");

  CLI::App* tessellate =
      app.add_subcommand("tessellate", "build a centroidal Voronoi tessellation cache");
  tessellate->add_option("--n", n_points, "number of generators")->required();
  tessellate->add_option("--iterations", iterations, "Lloyd iterations");
  tessellate->add_option("--seed", seed, "sampling seed");
  tessellate->add_option("--out", tess_path, "cache file to write")->required();

  CLI::App* oracle = app.add_subcommand("oracle", "small-problem diagnostics");
  oracle->require_subcommand(1);
  CLI::App* mu2 = oracle->add_subcommand("mu2", "dense spectral-gap oracle");
  mu2->add_option("--mode", mode, "grid or sphere")->required();
  mu2->add_option("--target", target_path, "target image (grid) or levels file (sphere)")
      ->required();
  mu2->add_option("--tess", tess_path, "tessellation cache (sphere mode)");
  mu2->add_option("--dt", dt, "time step");
  mu2->add_option("--dx", dx, "cell width (grid mode)");
  mu2->add_option("--dy", dy, "cell height (grid mode)");
  mu2->add_option("--eps-floor", eps_floor, "positivity floor (grid mode)");
  mu2->add_option("--pi-s", pi_s, "small level value (sphere mode)");
  mu2->add_option("--pi-b", pi_b, "large level value (sphere mode)");

  CLI::App* rasterize =
      app.add_subcommand("rasterize", "sample an equirectangular mask onto tessellation cells");
  rasterize->add_option("--tess", tess_path, "tessellation cache file")->required();
  rasterize->add_option("--mask", mask_path, "equirectangular mask (PNG)")->required();
  rasterize->add_option("--threshold", threshold, "mask threshold for the large level");
  rasterize->add_option("--out", out_dir, "levels file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*grid || *grid_sharp) {
    gc.initial_png = init_path.c_str();
    gc.target_png = target_path.c_str();
    gc.output_dir = out_dir.c_str();
    gc.dt = dt;
    gc.dx = dx;
    gc.dy = dy;
    gc.eps_floor = eps_floor;
    gc.n_steps = steps;
    gc.frame_stride = stride;
    gc.pi_s = pi_s;
    gc.pi_b = pi_b;
    gc.bisection_tol = bisection_tol;
    gc.linear_steps_per_round = linear_steps;
    gc.max_rounds = max_rounds;
    ReportHandle report;
    const bool sharp_mode = grid_sharp->parsed();
    const fpm_status st =
        sharp_mode ? fpm_run_grid_sharp(&gc, &report.r) : fpm_run_grid(&gc, &report.r);
    if (st != FPM_OK) return fail_run(st);
    print_report(report.r, sharp_mode);
    std::printf("outputs written to %s\n", out_dir.c_str());
    return 0;
  }

  if (*sphere || *sphere_sharp) {
    TessHandle tess;
    fpm_status st = fpm_tessellation_load(tess_path.c_str(), &tess.t);
    if (st != FPM_OK) return fail_run(st);
    sc.initial_levels = init_path.c_str();
    sc.target_levels = target_path.c_str();
    sc.output_dir = out_dir.c_str();
    sc.dt = dt;
    sc.pi_s = pi_s;
    sc.pi_b = pi_b;
    sc.bisection_tol = bisection_tol;
    sc.n_steps = steps;
    sc.frame_stride = stride;
    sc.ramp_schedule = schedule == "ramp" ? 1 : 0;
    sc.linear_steps_per_round = linear_steps;
    sc.max_rounds = max_rounds;
    sc.frame_width = frame_w;
    sc.frame_height = frame_h;
    ReportHandle report;
    const bool sharp_mode = sphere_sharp->parsed();
    st = sharp_mode ? fpm_run_sphere_sharp(tess.t, &sc, &report.r)
                    : fpm_run_sphere(tess.t, &sc, &report.r);
    if (st != FPM_OK) return fail_run(st);
    print_report(report.r, sharp_mode);
    std::printf("outputs written to %s\n", out_dir.c_str());
    return 0;
  }

  if (*tessellate) {
    TessHandle tess;
    fpm_status st = fpm_tessellate(n_points, iterations, seed, &tess.t);
    if (st != FPM_OK) return fail_run(st);
    st = fpm_tessellation_save(tess.t, tess_path.c_str());
    if (st != FPM_OK) return fail_run(st);
    std::printf("tessellation: n=%d iterations=%d seed=%" PRIu64 " cell-area stddev=%.6g\n",
                fpm_tessellation_size(tess.t), iterations, seed,
                fpm_tessellation_area_stddev(tess.t));
    std::printf("cache written to %s\n", tess_path.c_str());
    return 0;
  }

  if (*mu2) {
    double value = 0.0;
    if (mode == "grid") {
      const fpm_status st = fpm_grid_mu2(target_path.c_str(), dt, dx, dy, eps_floor, &value);
      if (st != FPM_OK) return fail_run(st);
    } else if (mode == "sphere") {
      if (tess_path.empty()) {
        std::fprintf(stderr, "error: sphere mode needs --tess\n");
        return 2;
      }
      TessHandle tess;
      fpm_status st = fpm_tessellation_load(tess_path.c_str(), &tess.t);
      if (st != FPM_OK) return fail_run(st);
      st = fpm_sphere_mu2(tess.t, target_path.c_str(), pi_s, pi_b, dt, &value);
      if (st != FPM_OK) return fail_run(st);
    } else {
      std::fprintf(stderr, "error: --mode must be grid or sphere\n");
      return 2;
    }
    std::printf("mu2 = %.17g\n", value);
    return 0;
  }

  if (*rasterize) {
    TessHandle tess;
    fpm_status st = fpm_tessellation_load(tess_path.c_str(), &tess.t);
    if (st != FPM_OK) return fail_run(st);
    st = fpm_rasterize_mask(tess.t, mask_path.c_str(), threshold, out_dir.c_str());
    if (st != FPM_OK) return fail_run(st);
    std::printf("levels written to %s\n", out_dir.c_str());
    return 0;
  }

  return 2;
}
