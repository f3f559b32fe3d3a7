#include "markov.hpp"

#include <cmath>
#include <stdexcept>

#include "diagnostics.hpp"
#include "metrics.hpp"

namespace fpmorph {

namespace {

void require_positive(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!(x > 0.0)) throw std::invalid_argument(std::string(what) + " must be strictly positive");
  }
}

}  // namespace

double MarkovRates::transition_prob(int i, int j) const {
  const auto& nb = neighbors[std::size_t(i)];
  for (int s = 0; s < int(nb.size()); ++s) {
    if (nb[std::size_t(s)] == j) return p_in[std::size_t(i)][std::size_t(s)];
  }
  return 0.0;
}

MarkovRates build_rates(const SphereTessellation& tess, std::span<const double> pi, double dt) {
  const int n = tess.size();
  if (int(pi.size()) != n) throw std::invalid_argument("equilibrium size does not match cloud");
  require_positive(pi, "equilibrium");
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!tess.connected()) {
    throw std::invalid_argument("tessellation adjacency is disconnected: dynamics not ergodic");
  }

  MarkovRates rates;
  rates.dt = dt;
  rates.neighbors = tess.neighbors;
  rates.lambda.resize(std::size_t(n));
  rates.p_in.resize(std::size_t(n));
  rates.p_out.resize(std::size_t(n));
  rates.mass_weight.resize(std::size_t(n));

  for (int i = 0; i < n; ++i) {
    const auto& nb = tess.neighbors[std::size_t(i)];
    double acc = 0.0;
    for (int s = 0; s < int(nb.size()); ++s) {
      const int j = nb[std::size_t(s)];
      acc += (pi[std::size_t(i)] + pi[std::size_t(j)]) /
             tess.chord_dist[std::size_t(i)][std::size_t(s)] *
             tess.face_length[std::size_t(i)][std::size_t(s)];
    }
    rates.lambda[std::size_t(i)] =
        acc / (2.0 * tess.cell_area[std::size_t(i)] * pi[std::size_t(i)]);
    rates.mass_weight[std::size_t(i)] =
        (1.0 + rates.lambda[std::size_t(i)] * dt) * tess.cell_area[std::size_t(i)];
  }
  for (int i = 0; i < n; ++i) {
    const auto& nb = tess.neighbors[std::size_t(i)];
    auto& pin = rates.p_in[std::size_t(i)];
    auto& pout = rates.p_out[std::size_t(i)];
    pin.resize(nb.size());
    pout.resize(nb.size());
    for (int s = 0; s < int(nb.size()); ++s) {
      const int j = nb[std::size_t(s)];
      const double geom = tess.face_length[std::size_t(i)][std::size_t(s)] /
                          tess.chord_dist[std::size_t(i)][std::size_t(s)];
      // P_{ij} (from j to i) and P_{ji} (from i to j)
      pin[std::size_t(s)] = (pi[std::size_t(i)] + pi[std::size_t(j)]) /
                            (2.0 * pi[std::size_t(j)] * tess.cell_area[std::size_t(j)]) * geom /
                            rates.lambda[std::size_t(j)];
      pout[std::size_t(s)] = (pi[std::size_t(j)] + pi[std::size_t(i)]) /
                             (2.0 * pi[std::size_t(i)] * tess.cell_area[std::size_t(i)]) * geom /
                             rates.lambda[std::size_t(i)];
    }
  }
  return rates;
}

void fp_step_cloud(const MarkovRates& rates, std::span<const double> pi,
                   std::span<const double> rho_in, std::span<double> rho_out) {
  const int n = rates.size();
  if (int(pi.size()) != n || int(rho_in.size()) != n || int(rho_out.size()) != n) {
    throw std::invalid_argument("field size does not match rates");
  }
  for (int i = 0; i < n; ++i) {
    const auto& nb = rates.neighbors[std::size_t(i)];
    const auto& pout = rates.p_out[std::size_t(i)];
    double acc = 0.0;
    for (int s = 0; s < int(nb.size()); ++s) {
      const int j = nb[std::size_t(s)];
      acc += pout[std::size_t(s)] * (rho_in[std::size_t(j)] / pi[std::size_t(j)]);
    }
    const double lam_dt = rates.lambda[std::size_t(i)] * rates.dt;
    const double u = (rho_in[std::size_t(i)] / pi[std::size_t(i)] + lam_dt * acc) / (1.0 + lam_dt);
    rho_out[std::size_t(i)] = u * pi[std::size_t(i)];
  }
}

double weighted_mass_cloud(const MarkovRates& rates, std::span<const double> rho) {
  if (rho.size() != rates.mass_weight.size()) throw std::invalid_argument("field size mismatch");
  return weighted_sum(rates.mass_weight, rho);
}

double adjust_initial_mass_cloud(const MarkovRates& rates, std::span<const double> pi,
                                 std::span<double> rho) {
  if (rho.size() != rates.mass_weight.size() || pi.size() != rho.size()) {
    throw std::invalid_argument("field size mismatch");
  }
  require_positive(rho, "initial density");
  const double c = weighted_sum(rates.mass_weight, pi) / weighted_sum(rates.mass_weight, rho);
  for (double& v : rho) v *= c;
  return c;
}

ConvergenceReport run_cloud(CloudState& state, const MarkovRates& rates, long long n_steps,
                            long long frame_stride, FrameSink& sink) {
  const int n = rates.size();
  if (int(state.pi.size()) != n || int(state.rho.size()) != n) {
    throw std::invalid_argument("cloud state does not match rates");
  }
  if (n_steps < 0) throw std::invalid_argument("n_steps must be non-negative");
  if (frame_stride < 1) throw std::invalid_argument("frame_stride must be positive");

  ConvergenceReport report;
  report.channels.push_back({state.tag, {}, {}, state.mass_scale, {}});
  std::vector<double> scratch(state.rho.size());

  auto record = [&](long long step) {
    report.steps.push_back(step);
    report.times.push_back(double(step) * rates.dt);
    report.channels[0].errors.push_back(rel_rms_error(state.rho, state.pi));
    report.channels[0].mass.push_back(weighted_mass_cloud(rates, state.rho));
  };
  auto emit = [&](long long step) {
    std::vector<std::span<const double>> views{std::span<const double>(state.rho)};
    sink.emit(step, double(step) * rates.dt, views);
  };

  record(0);
  emit(0);
  for (long long step = 1; step <= n_steps; ++step) {
    fp_step_cloud(rates, state.pi, state.rho, scratch);
    state.rho.swap(scratch);
    record(step);
    if (step % frame_stride == 0 || step == n_steps) emit(step);
  }
  report.total_steps = n_steps;
  report.channels[0].fit = fit_decay_rate(report.channels[0].errors);
  return report;
}

}  // namespace fpmorph
