#pragma once

#include <string>

#include "report.hpp"
#include "sphere_geometry.hpp"

namespace fpmorph {

// End-to-end runs: load inputs, floor/adjust, evolve, and write frames,
// errors.csv, report.txt, and run_meta.txt into output_dir.

struct GridRunConfig {
  std::string initial_png;
  std::string target_png;
  std::string output_dir;
  double dt = 0.01;
  double dx = 1e-4;
  double dy = 1e-4;
  double eps_floor = 1e-3;
  long long n_steps = 10000;
  long long frame_stride = 100;
  // sharp mode
  double pi_s = 0.1;
  double pi_b = 0.9;
  double bisection_tol = 1e-6;
  int linear_steps_per_round = 10;
  int max_rounds = 50;
};

ConvergenceReport run_grid_pipeline(const GridRunConfig& cfg);
ConvergenceReport run_grid_sharp_pipeline(const GridRunConfig& cfg);

struct SphereRunConfig {
  std::string initial_levels;
  std::string target_levels;
  std::string output_dir;
  double dt = 0.05;
  double pi_s = 0.1;
  double pi_b = 0.9;
  double bisection_tol = 1e-6;
  long long n_steps = 10000;
  long long frame_stride = 100;
  bool ramp_schedule = true;  // 2k linear steps in round k; else constant
  int linear_steps_per_round = 10;
  int max_rounds = 50;
  int frame_width = 256;
  int frame_height = 128;
};

ConvergenceReport run_sphere_pipeline(const SphereTessellation& tess, const SphereRunConfig& cfg);
ConvergenceReport run_sphere_sharp_pipeline(const SphereTessellation& tess,
                                            const SphereRunConfig& cfg);

// Spectral-gap oracles behind the CLI's oracle subcommand (dense eigensolve;
// capped problem sizes).
double grid_mu2_from_png(const std::string& target_png, double dt, double dx, double dy,
                         double eps_floor);
double sphere_mu2_from_levels(const SphereTessellation& tess, const std::string& levels_path,
                              double pi_s, double pi_b, double dt);

}  // namespace fpmorph
