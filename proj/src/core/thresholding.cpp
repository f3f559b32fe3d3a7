#include "thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diagnostics.hpp"
#include "metrics.hpp"

namespace fpmorph {

namespace {

// Weighted mass of the projection at threshold xi minus the target mass.
double residual_at(double xi, std::span<const double> rho_tilde, std::span<const double> weights,
                   double pi_s, double pi_b, double target) {
  double mass = 0.0;
  for (std::size_t k = 0; k < rho_tilde.size(); ++k) {
    mass += weights[k] * (rho_tilde[k] <= xi ? pi_s : pi_b);
  }
  return mass - target;
}

}  // namespace

void SharpConfig::validate() const {
  if (!(pi_s > 0.0) || !(pi_b > pi_s)) {
    throw std::invalid_argument("levels must satisfy 0 < pi_s < pi_b");
  }
  if (!(bisection_tol > 0.0)) throw std::invalid_argument("bisection tolerance must be positive");
  if (max_rounds < 1) throw std::invalid_argument("max_rounds must be positive");
  if (schedule.kind == ThresholdSchedule::Kind::Constant && schedule.constant_steps < 1) {
    throw std::invalid_argument("schedule must run at least one linear step per round");
  }
}

ThresholdResult threshold_project(std::span<const double> rho_tilde, std::span<const double> pi,
                                  std::span<const double> weights, const SharpConfig& cfg) {
  cfg.validate();
  if (rho_tilde.empty()) throw std::invalid_argument("cannot threshold an empty field");
  if (pi.size() != rho_tilde.size() || weights.size() != rho_tilde.size()) {
    throw std::invalid_argument("field size mismatch");
  }
  double target = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    if (!(weights[k] > 0.0)) throw std::invalid_argument("weights must be positive");
    if (pi[k] != cfg.pi_s && pi[k] != cfg.pi_b) {
      throw std::invalid_argument("equilibrium is not two-valued at the configured levels");
    }
    target += weights[k] * pi[k];
  }

  const auto [mn, mx] = std::minmax_element(rho_tilde.begin(), rho_tilde.end());
  double lo = *mn - cfg.bisection_tol;  // below the minimum: all cells take pi_b
  double hi = *mx;                      // at the maximum: all cells take pi_s
  while (hi - lo > cfg.bisection_tol) {
    const double mid = 0.5 * (lo + hi);
    if (residual_at(mid, rho_tilde, weights, cfg.pi_s, cfg.pi_b, target) > 0.0) {
      lo = mid;  // mass too large: convert more cells to pi_s
    } else {
      hi = mid;
    }
  }
  const double f_lo = residual_at(lo, rho_tilde, weights, cfg.pi_s, cfg.pi_b, target);
  const double f_hi = residual_at(hi, rho_tilde, weights, cfg.pi_s, cfg.pi_b, target);

  ThresholdResult result;
  result.xi = std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
  result.residual = std::abs(f_lo) <= std::abs(f_hi) ? f_lo : f_hi;
  result.values.resize(rho_tilde.size());
  for (std::size_t k = 0; k < rho_tilde.size(); ++k) {
    result.values[k] = rho_tilde[k] <= result.xi ? cfg.pi_s : cfg.pi_b;
  }
  return result;
}

namespace {

// Maps an arbitrary two-valued field onto {pi_s, pi_b}.
void remap_levels(std::vector<double>& rho, const SharpConfig& cfg) {
  double lo = rho.front(), hi = rho.front();
  for (double v : rho) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi) {
    const double v = std::abs(lo - cfg.pi_s) <= std::abs(lo - cfg.pi_b) ? cfg.pi_s : cfg.pi_b;
    std::fill(rho.begin(), rho.end(), v);
    return;
  }
  for (double v : rho) {
    if (v != lo && v != hi) {
      throw std::invalid_argument("sharp dynamics need a two-valued initial field");
    }
  }
  for (double& v : rho) v = (v == lo) ? cfg.pi_s : cfg.pi_b;
}

}  // namespace

ConvergenceReport sharp_evolve(std::vector<SharpChannel>& channels, const SharpConfig& cfg,
                               const LinearStep& step, double dt, long long frame_stride,
                               FrameSink& sink) {
  cfg.validate();
  if (channels.empty()) throw std::invalid_argument("sharp_evolve needs at least one channel");
  if (frame_stride < 1) throw std::invalid_argument("frame_stride must be positive");

  ConvergenceReport report;
  report.sharp = true;
  std::vector<std::vector<double>> scratch(channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c) {
    auto& ch = channels[c];
    if (ch.pi.size() != ch.rho.size() || ch.weights.size() != ch.rho.size() || ch.rho.empty()) {
      throw std::invalid_argument("channel arrays have inconsistent sizes");
    }
    for (std::size_t k = 0; k < ch.pi.size(); ++k) {
      if (ch.pi[k] != cfg.pi_s && ch.pi[k] != cfg.pi_b) {
        throw std::invalid_argument("equilibrium is not two-valued at the configured levels");
      }
    }
    remap_levels(ch.rho, cfg);
    scratch[c].resize(ch.rho.size());
    report.channels.push_back({ch.tag, {}, {}, ch.mass_scale, {}});
  }

  long long step_index = 0;
  long long last_emit = -1;
  double time = 0.0;
  auto record = [&]() {
    report.steps.push_back(step_index);
    report.times.push_back(time);
    for (std::size_t c = 0; c < channels.size(); ++c) {
      auto& ch = channels[c];
      report.channels[c].errors.push_back(rel_rms_error(ch.rho, ch.pi));
      report.channels[c].mass.push_back(weighted_sum(ch.weights, ch.rho));
    }
  };
  auto emit = [&]() {
    if (step_index == last_emit) return;
    last_emit = step_index;
    std::vector<std::span<const double>> views;
    views.reserve(channels.size());
    for (auto& ch : channels) views.emplace_back(ch.rho);
    sink.emit(step_index, time, views);
  };
  auto all_converged = [&]() {
    for (auto& ch : channels) {
      if (ch.rho != ch.pi) return false;
    }
    return true;
  };

  // Align the initial weighted mass with pi's where the level counts allow.
  for (auto& ch : channels) {
    const double mass = weighted_sum(ch.weights, ch.rho);
    const double target = weighted_sum(ch.weights, ch.pi);
    if (std::abs(mass - target) > 1e-12 * std::max(std::abs(target), 1.0)) {
      auto projected = threshold_project(ch.rho, ch.pi, ch.weights, cfg);
      ch.rho = std::move(projected.values);
      report.threshold_residuals.push_back(projected.residual);
    }
  }

  record();
  emit();
  if (all_converged()) {
    report.converged = true;
    report.converged_round = 0;
    report.converged_step = 0;
    report.total_steps = 0;
    for (auto& series : report.channels) series.fit = fit_decay_rate(series.errors);
    return report;
  }

  for (int round = 1; round <= cfg.max_rounds; ++round) {
    const int linear_steps = cfg.schedule.steps_in_round(round);
    for (int s = 0; s < linear_steps; ++s) {
      for (std::size_t c = 0; c < channels.size(); ++c) {
        step(int(c), channels[c].rho, scratch[c]);
        channels[c].rho.swap(scratch[c]);
      }
      ++step_index;
      time += dt;
      record();
      if (step_index % frame_stride == 0) emit();
    }
    for (std::size_t c = 0; c < channels.size(); ++c) {
      auto& ch = channels[c];
      auto projected = threshold_project(ch.rho, ch.pi, ch.weights, cfg);
      ch.rho = std::move(projected.values);
      report.threshold_residuals.push_back(projected.residual);
    }
    ++step_index;  // the projection advances the recorded series
    record();
    if (step_index % frame_stride == 0) emit();
    if (all_converged()) {
      report.converged = true;
      report.converged_round = round;
      report.converged_step = step_index;
      break;
    }
  }

  report.total_steps = step_index;
  emit();  // final state
  for (auto& series : report.channels) series.fit = fit_decay_rate(series.errors);
  return report;
}

}  // namespace fpmorph
