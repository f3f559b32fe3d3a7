#include "grid.hpp"

#include <cmath>
#include <stdexcept>

#include "diagnostics.hpp"
#include "metrics.hpp"

namespace fpmorph {

namespace {

inline int clamp_idx(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

void require_positive(std::span<const double> field, const char* what) {
  for (double v : field) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be strictly positive");
  }
}

}  // namespace

void GridShape::validate() const {
  if (n_cols < 2 || n_rows < 2) {
    throw std::invalid_argument("grid shape must be at least 2x2 (stencil needs both neighbors)");
  }
  if (!(dx > 0.0) || !(dy > 0.0)) {
    throw std::invalid_argument("grid spacings must be positive");
  }
}

std::vector<double> compute_lambda(const GridShape& shape, std::span<const double> pi) {
  shape.validate();
  if (pi.size() != std::size_t(shape.cell_count())) {
    throw std::invalid_argument("equilibrium size does not match grid shape");
  }
  require_positive(pi, "equilibrium");

  const int N = shape.n_cols, M = shape.n_rows;
  const double ax = 1.0 / (shape.dx * shape.dx);
  const double ay = 1.0 / (shape.dy * shape.dy);
  std::vector<double> lambda(pi.size());
  for (int j = 0; j < M; ++j) {
    for (int i = 0; i < N; ++i) {
      const double p = pi[std::size_t(j) * N + i];
      const double pe = pi[std::size_t(j) * N + clamp_idx(i + 1, N)];
      const double pw = pi[std::size_t(j) * N + clamp_idx(i - 1, N)];
      const double pn = pi[std::size_t(clamp_idx(j + 1, M)) * N + i];
      const double ps = pi[std::size_t(clamp_idx(j - 1, M)) * N + i];
      lambda[std::size_t(j) * N + i] = ax * ((p + pe) / (2.0 * p) + (pw + p) / (2.0 * p)) +
                                       ay * ((p + pn) / (2.0 * p) + (ps + p) / (2.0 * p));
    }
  }
  return lambda;
}

GridEquilibrium::GridEquilibrium(GridShape shape, std::vector<double> pi, double dt)
    : shape_(shape), dt_(dt), pi_(std::move(pi)) {
  if (!(dt_ > 0.0)) throw std::invalid_argument("time step must be positive");
  lambda_ = compute_lambda(shape_, pi_);

  const int N = shape_.n_cols, M = shape_.n_rows;
  const std::size_t n = pi_.size();
  weight_.resize(n);
  inv_weight_.resize(n);
  inv_pi_.resize(n);
  ce_.resize(n);
  cw_.resize(n);
  cn_.resize(n);
  cs_.resize(n);
  const double ax = 1.0 / (2.0 * shape_.dx * shape_.dx);
  const double ay = 1.0 / (2.0 * shape_.dy * shape_.dy);
  for (int j = 0; j < M; ++j) {
    for (int i = 0; i < N; ++i) {
      const std::size_t k = std::size_t(j) * N + i;
      const double p = pi_[k];
      weight_[k] = 1.0 + dt_ * lambda_[k];
      inv_weight_[k] = 1.0 / weight_[k];
      inv_pi_[k] = 1.0 / p;
      ce_[k] = (p + pi_[std::size_t(j) * N + clamp_idx(i + 1, N)]) * ax;
      cw_[k] = (pi_[std::size_t(j) * N + clamp_idx(i - 1, N)] + p) * ax;
      cn_[k] = (p + pi_[std::size_t(clamp_idx(j + 1, M)) * N + i]) * ay;
      cs_[k] = (pi_[std::size_t(clamp_idx(j - 1, M)) * N + i] + p) * ay;
    }
  }
}

double adjust_initial_mass(const GridEquilibrium& eq, std::span<double> rho) {
  if (rho.size() != eq.pi().size()) throw std::invalid_argument("field size mismatch");
  require_positive(rho, "initial density");
  const double target = weighted_sum(eq.weights(), eq.pi());
  const double have = weighted_sum(eq.weights(), rho);
  const double c = target / have;
  for (double& v : rho) v *= c;
  return c;
}

void fp_step_grid(const GridEquilibrium& eq, std::span<const double> rho_in,
                  std::span<double> rho_out) {
  const std::size_t n = eq.pi().size();
  if (rho_in.size() != n || rho_out.size() != n) {
    throw std::invalid_argument("field size does not match equilibrium shape");
  }
  const int N = eq.shape().n_cols, M = eq.shape().n_rows;
  const double dt = eq.dt();
  const auto inv_pi = eq.inv_pi();
  const auto inv_w = eq.inv_weight();
  const auto ce = eq.coeff_e(), cw = eq.coeff_w(), cn = eq.coeff_n(), cs = eq.coeff_s();

  for (int j = 0; j < M; ++j) {
    const int jn = clamp_idx(j + 1, M), js = clamp_idx(j - 1, M);
    for (int i = 0; i < N; ++i) {
      const std::size_t k = std::size_t(j) * N + i;
      const std::size_t ke = std::size_t(j) * N + clamp_idx(i + 1, N);
      const std::size_t kw = std::size_t(j) * N + clamp_idx(i - 1, N);
      const std::size_t kn = std::size_t(jn) * N + i;
      const std::size_t ks = std::size_t(js) * N + i;
      const double flux = ce[k] * (rho_in[ke] * inv_pi[ke]) + cw[k] * (rho_in[kw] * inv_pi[kw]) +
                          cn[k] * (rho_in[kn] * inv_pi[kn]) + cs[k] * (rho_in[ks] * inv_pi[ks]);
      rho_out[k] = (rho_in[k] + dt * flux) * inv_w[k];
    }
  }
}

double weighted_mass_grid(const GridEquilibrium& eq, std::span<const double> rho) {
  if (rho.size() != eq.pi().size()) throw std::invalid_argument("field size mismatch");
  return weighted_sum(eq.weights(), rho);
}

void ChannelSet::validate() const {
  if (channels.empty() || channels.size() > 3) {
    throw std::invalid_argument("channel set must hold 1 to 3 channels");
  }
  const GridShape& s = channels.front().eq.shape();
  for (const auto& ch : channels) {
    if (!(ch.eq.shape() == s)) throw std::invalid_argument("channels must share one grid shape");
    if (ch.rho.size() != ch.eq.pi().size()) throw std::invalid_argument("field size mismatch");
  }
}

ConvergenceReport run_grid(ChannelSet& set, long long n_steps, long long frame_stride,
                           FrameSink& sink) {
  set.validate();
  if (n_steps < 0) throw std::invalid_argument("n_steps must be non-negative");
  if (frame_stride < 1) throw std::invalid_argument("frame_stride must be positive");

  ConvergenceReport report;
  const double dt = set.channels.front().eq.dt();
  std::vector<std::vector<double>> scratch(set.channels.size());
  for (std::size_t c = 0; c < set.channels.size(); ++c) {
    auto& ch = set.channels[c];
    scratch[c].resize(ch.rho.size());
    report.channels.push_back({ch.tag, {}, {}, ch.mass_scale, {}});
  }

  auto record = [&](long long step) {
    report.steps.push_back(step);
    report.times.push_back(double(step) * dt);
    for (std::size_t c = 0; c < set.channels.size(); ++c) {
      auto& ch = set.channels[c];
      report.channels[c].errors.push_back(rel_rms_error(ch.rho, ch.eq.pi()));
      report.channels[c].mass.push_back(weighted_mass_grid(ch.eq, ch.rho));
    }
  };
  auto emit = [&](long long step) {
    std::vector<std::span<const double>> views;
    views.reserve(set.channels.size());
    for (auto& ch : set.channels) views.emplace_back(ch.rho);
    sink.emit(step, double(step) * dt, views);
  };

  record(0);
  emit(0);
  for (long long step = 1; step <= n_steps; ++step) {
    for (std::size_t c = 0; c < set.channels.size(); ++c) {
      auto& ch = set.channels[c];
      fp_step_grid(ch.eq, ch.rho, scratch[c]);
      ch.rho.swap(scratch[c]);
    }
    record(step);
    if (step % frame_stride == 0 || step == n_steps) emit(step);
  }

  report.total_steps = n_steps;
  for (auto& series : report.channels) series.fit = fit_decay_rate(series.errors);
  return report;
}

}  // namespace fpmorph
