#pragma once

#include <span>
#include <string>
#include <vector>

#include "report.hpp"
#include "sphere_geometry.hpp"

namespace fpmorph {

// Jump rates and transition probabilities of the Markov process whose
// forward equation is the point-cloud scheme. p_in[i][s] is the probability
// of a jump from neighbor j = neighbors[i][s] into i; p_out[i][s] the
// probability of a jump from i to that neighbor. Columns are stochastic:
// sum_s p_out[i][s] = 1 for every i.
struct MarkovRates {
  double dt = 0.0;
  std::vector<double> lambda;                 // jump rate per cell
  std::vector<std::vector<int>> neighbors;    // copy of the tessellation adjacency
  std::vector<std::vector<double>> p_in;
  std::vector<std::vector<double>> p_out;
  std::vector<double> mass_weight;            // (1 + lambda*dt) * |C_i|

  int size() const { return int(lambda.size()); }
  // P_{ij}: probability of a jump from j to i (0 when not adjacent).
  double transition_prob(int i, int j) const;
};

MarkovRates build_rates(const SphereTessellation& tess, std::span<const double> pi, double dt);

// One explicit update on the cloud; pure function of rho_in.
void fp_step_cloud(const MarkovRates& rates, std::span<const double> pi,
                   std::span<const double> rho_in, std::span<double> rho_out);

double weighted_mass_cloud(const MarkovRates& rates, std::span<const double> rho);

// Scales rho in place so its weighted mass matches pi's. Returns the scalar.
double adjust_initial_mass_cloud(const MarkovRates& rates, std::span<const double> pi,
                                 std::span<double> rho);

struct CloudState {
  std::string tag = "gray";
  std::vector<double> pi;
  std::vector<double> rho;
  double mass_scale = 1.0;
};

ConvergenceReport run_cloud(CloudState& state, const MarkovRates& rates, long long n_steps,
                            long long frame_stride, FrameSink& sink);

}  // namespace fpmorph
