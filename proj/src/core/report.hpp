#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fpmorph {

// Least-squares fit of log(error) against step index, expressed as a
// per-step geometric ratio.
struct RateFit {
  double rate = 1.0;
  double r_squared = 0.0;
  bool converged_series = false;  // window hit exact zero (or negative) entries
  bool decaying = false;          // rate < 1
  bool valid = false;             // enough samples for a fit
};

struct ChannelSeries {
  std::string tag;                  // "gray" or "r"/"g"/"b"
  std::vector<double> errors;       // relative RMS of rho/pi - 1, one per recorded step
  std::vector<double> mass;         // weighted mass, one per recorded step
  double mass_scale = 1.0;          // scalar c applied by the initial adjustment
  RateFit fit;
};

struct ConvergenceReport {
  std::vector<long long> steps;  // recorded step indices (every step is recorded)
  std::vector<double> times;     // simulated time at each recorded step
  std::vector<ChannelSeries> channels;

  // Sharp-dynamics bookkeeping.
  bool sharp = false;
  bool converged = false;
  long long converged_round = -1;
  long long converged_step = -1;
  std::vector<double> threshold_residuals;  // one per projection event

  long long total_steps = 0;
  std::vector<std::pair<std::string, std::string>> metadata;  // ordered key/value

  void add_meta(std::string key, std::string value) {
    metadata.emplace_back(std::move(key), std::move(value));
  }
};

// Receives evolving states at frame-emission steps. Implementations write
// PNGs, collect arrays for tests, or ignore the data.
struct FrameSink {
  virtual ~FrameSink() = default;
  virtual void emit(long long step, double time,
                    const std::vector<std::span<const double>>& channels) = 0;
};

struct NullFrameSink final : FrameSink {
  void emit(long long, double, const std::vector<std::span<const double>>&) override {}
};

}  // namespace fpmorph
