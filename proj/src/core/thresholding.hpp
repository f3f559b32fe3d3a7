#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "report.hpp"

namespace fpmorph {

struct ThresholdSchedule {
  enum class Kind { Constant, Ramp };
  Kind kind = Kind::Constant;
  int constant_steps = 10;

  // Linear steps in round k (1-based). Ramp mode runs 2k steps before the
  // k-th projection.
  int steps_in_round(int round) const {
    return kind == Kind::Ramp ? 2 * round : constant_steps;
  }
};

struct SharpConfig {
  double pi_s = 0.1;  // small level
  double pi_b = 0.9;  // large level
  ThresholdSchedule schedule;
  double bisection_tol = 1e-6;
  int max_rounds = 50;

  void validate() const;
};

struct ThresholdResult {
  std::vector<double> values;  // two-valued at {pi_s, pi_b}
  double xi = 0.0;             // chosen threshold
  double residual = 0.0;       // weighted-mass mismatch at xi
};

// Projects rho_tilde onto a {pi_s, pi_b}-valued field whose weighted mass
// matches pi's as closely as the discrete level sets allow. The threshold is
// located by bisection on the weighted-mass residual f (non-increasing in
// xi); once the bracket is shorter than bisection_tol the endpoint with the
// smaller |f| wins. The bracket opens slightly below min(rho_tilde) so the
// all-large projection stays reachable. Cells with rho_tilde <= xi take
// pi_s.
ThresholdResult threshold_project(std::span<const double> rho_tilde, std::span<const double> pi,
                                  std::span<const double> weights, const SharpConfig& cfg);

// One linear explicit update for channel `ch`, reading `in`, writing `out`.
using LinearStep =
    std::function<void(int ch, std::span<const double> in, std::span<double> out)>;

struct SharpChannel {
  std::string tag = "gray";
  std::vector<double> pi;       // two-valued equilibrium at {pi_s, pi_b}
  std::vector<double> rho;      // mutated in place
  std::vector<double> weights;  // (1 + dt*lambda) * cell measure
  double mass_scale = 1.0;
};

// Alternates blocks of linear steps with mass-conserving projections until
// every channel equals its equilibrium exactly or max_rounds is exhausted.
// Initial fields are remapped onto {pi_s, pi_b} and projected once if their
// weighted mass disagrees with pi's. Every linear step and every projection
// advances the recorded step index (projections leave simulated time
// unchanged). Returns the report flagged converged/non-converged with the
// round and cumulative step of convergence.
ConvergenceReport sharp_evolve(std::vector<SharpChannel>& channels, const SharpConfig& cfg,
                               const LinearStep& step, double dt, long long frame_stride,
                               FrameSink& sink);

}  // namespace fpmorph
