#pragma once

#include <span>
#include <string>
#include <vector>

#include "report.hpp"

namespace fpmorph {

// Uniform cell-centered 2-D grid. Fields are stored row-major with
// index(i, j) = j * n_cols + i; column i runs along x, row j along y
// (j increases upward).
struct GridShape {
  int n_cols = 0;  // N
  int n_rows = 0;  // M
  double dx = 0.0;
  double dy = 0.0;

  int cell_count() const { return n_cols * n_rows; }
  bool operator==(const GridShape&) const = default;
  void validate() const;  // throws std::invalid_argument
};

// lambda[i,j]: per-cell rate from the four half-sum equilibrium ratios,
// with mirrored ghost values at the boundary.
std::vector<double> compute_lambda(const GridShape& shape, std::span<const double> pi);

// Target density pi with everything the explicit update needs for a fixed
// time step: lambda, the 1 + dt*lambda weights, and the per-face transport
// coefficients (pi_ij + pi_nbr) / (2 h^2) under clamped-index mirroring.
class GridEquilibrium {
 public:
  GridEquilibrium(GridShape shape, std::vector<double> pi, double dt);

  const GridShape& shape() const { return shape_; }
  double dt() const { return dt_; }
  std::span<const double> pi() const { return pi_; }
  std::span<const double> lambda() const { return lambda_; }
  std::span<const double> weights() const { return weight_; }  // 1 + dt*lambda

  std::span<const double> coeff_e() const { return ce_; }
  std::span<const double> coeff_w() const { return cw_; }
  std::span<const double> coeff_n() const { return cn_; }
  std::span<const double> coeff_s() const { return cs_; }
  std::span<const double> inv_weight() const { return inv_weight_; }
  std::span<const double> inv_pi() const { return inv_pi_; }

 private:
  GridShape shape_;
  double dt_ = 0.0;
  std::vector<double> pi_, lambda_, weight_, inv_weight_, inv_pi_;
  std::vector<double> ce_, cw_, cn_, cs_;
};

// Scales rho in place so that sum (1 + dt*lambda) rho = sum (1 + dt*lambda) pi.
// Returns the applied scalar c.
double adjust_initial_mass(const GridEquilibrium& eq, std::span<double> rho);

// One explicit update, pure function of rho_in (Jacobi sweep into rho_out).
void fp_step_grid(const GridEquilibrium& eq, std::span<const double> rho_in,
                  std::span<double> rho_out);

double weighted_mass_grid(const GridEquilibrium& eq, std::span<const double> rho);

struct GridChannel {
  std::string tag;
  GridEquilibrium eq;
  std::vector<double> rho;
  double mass_scale = 1.0;
};

// 1-3 independently evolving channels sharing one shape.
struct ChannelSet {
  std::vector<GridChannel> channels;
  void validate() const;
};

// Iterates the explicit scheme n_steps times, recording the error and
// weighted mass per step and emitting frames at step 0, every frame_stride
// steps, and the final step. Channels evolve in place.
ConvergenceReport run_grid(ChannelSet& set, long long n_steps, long long frame_stride,
                           FrameSink& sink);

}  // namespace fpmorph
