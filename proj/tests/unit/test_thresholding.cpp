// Mass-conserving projection onto two levels and the alternating
// linear-step / threshold loop.

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "grid.hpp"
#include "metrics.hpp"
#include "test_util.hpp"
#include "thresholding.hpp"

using namespace fpmorph;

namespace {

SharpConfig base_cfg() {
  SharpConfig cfg;
  cfg.pi_s = 0.1;
  cfg.pi_b = 0.9;
  cfg.bisection_tol = 1e-6;
  cfg.max_rounds = 50;
  return cfg;
}

// Exhaustive minimum of |f| over every cut position (the n+1 possible
// two-valued outputs of a threshold on sorted values).
double brute_force_best_residual(std::span<const double> rho, std::span<const double> pi,
                                 std::span<const double> weights, const SharpConfig& cfg) {
  double target = 0.0, total_b = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    target += weights[k] * pi[k];
    total_b += weights[k] * cfg.pi_b;
  }
  std::vector<std::size_t> order(rho.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return rho[a] < rho[b]; });
  double best = std::abs(total_b - target);  // cut below the minimum: all pi_b
  double mass = total_b;
  for (std::size_t c : order) {
    mass += weights[c] * (cfg.pi_s - cfg.pi_b);  // one more cell drops to pi_s
    best = std::min(best, std::abs(mass - target));
  }
  return best;
}

}  // namespace

TEST_CASE("threshold_project: six-cell brute-force case") {
  const SharpConfig cfg = base_cfg();
  const std::vector<double> rho{0.12, 0.2, 0.5, 0.55, 0.8, 0.88};
  const std::vector<double> pi{0.1, 0.1, 0.1, 0.9, 0.9, 0.9};
  const std::vector<double> w(6, 1.0);
  const auto result = threshold_project(rho, pi, w, cfg);
  // the exact-mass cut lies between 0.5 and 0.55
  CHECK(result.xi >= 0.5);
  CHECK(result.xi < 0.55);
  CHECK(result.residual == doctest::Approx(0.0).epsilon(1e-15));
  const std::vector<double> expect{0.1, 0.1, 0.1, 0.9, 0.9, 0.9};
  CHECK(result.values == expect);
}

TEST_CASE("threshold_project: a field already equal to pi reproduces pi") {
  const SharpConfig cfg = base_cfg();
  std::vector<double> pi(20);
  for (std::size_t k = 0; k < pi.size(); ++k) pi[k] = (k % 3 == 0) ? cfg.pi_b : cfg.pi_s;
  const auto w = testutil::random_positive(20, 5, 0.5, 2.0);
  const auto result = threshold_project(pi, pi, w, cfg);
  CHECK(result.values == pi);
  CHECK(result.residual == doctest::Approx(0.0));
}

TEST_CASE("threshold_project: all-equal input picks the smaller-residual constant") {
  const SharpConfig cfg = base_cfg();
  const std::vector<double> w(8, 1.0);
  const std::vector<double> rho(8, 0.4);

  std::vector<double> pi_mostly_b(8, cfg.pi_b);
  pi_mostly_b[0] = cfg.pi_s;
  auto result = threshold_project(rho, pi_mostly_b, w, cfg);
  CHECK(result.values == std::vector<double>(8, cfg.pi_b));

  std::vector<double> pi_mostly_s(8, cfg.pi_s);
  pi_mostly_s[0] = cfg.pi_b;
  result = threshold_project(rho, pi_mostly_s, w, cfg);
  CHECK(result.values == std::vector<double>(8, cfg.pi_s));
}

TEST_CASE("threshold_project: output is two-valued and matches the brute force") {
  const SharpConfig cfg = base_cfg();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    testutil::Uniform u(seed);
    const int n = 5 + int(u.raw() % 40);
    std::vector<double> rho(static_cast<std::size_t>(n)), pi(static_cast<std::size_t>(n));
    for (auto& v : rho) v = u(cfg.pi_s, cfg.pi_b);
    for (auto& v : pi) v = u(0, 1) < 0.5 ? cfg.pi_s : cfg.pi_b;
    const auto w = testutil::random_positive(n, seed + 1000, 0.5, 1.5);

    const auto result = threshold_project(rho, pi, w, cfg);
    double mass = 0.0, target = 0.0, wmax = 0.0;
    for (int k = 0; k < n; ++k) {
      const bool is_s = result.values[std::size_t(k)] == cfg.pi_s;
      const bool is_b = result.values[std::size_t(k)] == cfg.pi_b;
      CHECK((is_s || is_b));
      mass += w[std::size_t(k)] * result.values[std::size_t(k)];
      target += w[std::size_t(k)] * pi[std::size_t(k)];
      wmax = std::max(wmax, w[std::size_t(k)]);
    }
    CHECK(result.residual == doctest::Approx(mass - target).epsilon(1e-12));
    // the endpoint rule is globally optimal for a monotone step function
    const double best = brute_force_best_residual(rho, pi, w, cfg);
    CHECK(std::abs(result.residual) <= best + 1e-9);
    CHECK(std::abs(result.residual) <= wmax * (cfg.pi_b - cfg.pi_s) + 1e-12);
  }
}

TEST_CASE("threshold_project: the residual is non-increasing in xi") {
  const SharpConfig cfg = base_cfg();
  testutil::Uniform u(99);
  const int n = 30;
  std::vector<double> rho(static_cast<std::size_t>(n)), pi(static_cast<std::size_t>(n));
  for (auto& v : rho) v = u(cfg.pi_s, cfg.pi_b);
  for (auto& v : pi) v = u(0, 1) < 0.5 ? cfg.pi_s : cfg.pi_b;
  double target = 0.0;
  for (int k = 0; k < n; ++k) target += pi[std::size_t(k)];
  auto f = [&](double xi) {
    double mass = 0.0;
    for (int k = 0; k < n; ++k) {
      mass += rho[std::size_t(k)] <= xi ? cfg.pi_s : cfg.pi_b;
    }
    return mass - target;
  };
  double prev = f(0.0);
  for (double xi = 0.0; xi <= 1.0; xi += 0.01) {
    const double cur = f(xi);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("threshold_project rejects invalid inputs") {
  const SharpConfig cfg = base_cfg();
  const std::vector<double> w(4, 1.0);
  CHECK_THROWS_AS(threshold_project({}, {}, {}, cfg), std::invalid_argument);
  const std::vector<double> rho{0.2, 0.3, 0.4, 0.5};
  const std::vector<double> bad_pi{0.1, 0.5, 0.9, 0.1};  // 0.5 is not a configured level
  CHECK_THROWS_AS(threshold_project(rho, bad_pi, w, cfg), std::invalid_argument);
  SharpConfig bad = cfg;
  bad.pi_b = bad.pi_s;
  const std::vector<double> pi{0.1, 0.1, 0.1, 0.1};
  CHECK_THROWS_AS(threshold_project(rho, pi, w, bad), std::invalid_argument);
}

namespace {

struct SharpGridFixture {
  GridShape shape{32, 32, 1.0, 1.0};
  std::vector<GridEquilibrium> eqs;
  std::vector<SharpChannel> channels;
  SharpConfig cfg = base_cfg();
  double dt = 0.5;

  // disk indicator: value pi_b inside a circle, pi_s outside
  std::vector<double> disk(double cx, double cy, double r) const {
    std::vector<double> f(std::size_t(shape.cell_count()), cfg.pi_s);
    for (int j = 0; j < shape.n_rows; ++j) {
      for (int i = 0; i < shape.n_cols; ++i) {
        const double ddx = i - cx, ddy = j - cy;
        if (ddx * ddx + ddy * ddy <= r * r) {
          f[std::size_t(j) * 32 + std::size_t(i)] = cfg.pi_b;
        }
      }
    }
    return f;
  }

  void setup(std::vector<double> rho0, std::vector<double> pi) {
    eqs.emplace_back(shape, pi, dt);
    SharpChannel ch;
    ch.pi = std::move(pi);
    ch.rho = std::move(rho0);
    ch.weights.assign(eqs[0].weights().begin(), eqs[0].weights().end());
    channels.push_back(std::move(ch));
  }

  LinearStep stepper() {
    return [this](int c, std::span<const double> in, std::span<double> out) {
      fp_step_grid(eqs[std::size_t(c)], in, out);
    };
  }
};

}  // namespace

TEST_CASE("sharp_evolve: starting at equilibrium converges at round zero") {
  SharpGridFixture fx;
  auto pi = fx.disk(16, 16, 8);
  fx.setup(pi, pi);
  NullFrameSink sink;
  const auto report = sharp_evolve(fx.channels, fx.cfg, fx.stepper(), fx.dt, 100, sink);
  CHECK(report.converged);
  CHECK(report.converged_round == 0);
  CHECK(report.converged_step == 0);
  CHECK(report.total_steps == 0);
}

TEST_CASE("sharp_evolve: thresholded run reaches the equilibrium exactly; linear does not") {
  SharpGridFixture fx;
  fx.cfg.schedule.kind = ThresholdSchedule::Kind::Constant;
  fx.cfg.schedule.constant_steps = 10;
  auto rho0 = fx.disk(10, 10, 7);
  auto pi = fx.disk(20, 20, 7);
  fx.setup(rho0, pi);
  NullFrameSink sink;
  const auto report = sharp_evolve(fx.channels, fx.cfg, fx.stepper(), fx.dt, 1000, sink);
  CHECK(report.converged);
  CHECK(report.converged_round <= 50);
  CHECK(fx.channels[0].rho == fx.channels[0].pi);
  CHECK(report.channels[0].errors.back() == 0.0);

  // linear-only comparison over at least as many steps never hits zero
  GridEquilibrium eq(fx.shape, fx.channels[0].pi, fx.dt);
  std::vector<double> rho = fx.disk(10, 10, 7);
  adjust_initial_mass(eq, rho);
  std::vector<double> out(rho.size());
  for (long long s = 0; s < report.total_steps + 10; ++s) {
    fp_step_grid(eq, rho, out);
    rho.swap(out);
  }
  CHECK(rel_rms_error(rho, fx.channels[0].pi) > 0.0);
}

TEST_CASE("sharp_evolve: equilibrium is absorbing") {
  SharpGridFixture fx;
  auto rho0 = fx.disk(12, 12, 6);
  auto pi = fx.disk(18, 18, 6);
  fx.setup(rho0, pi);
  NullFrameSink sink;
  auto report = sharp_evolve(fx.channels, fx.cfg, fx.stepper(), fx.dt, 1000, sink);
  REQUIRE(report.converged);
  // continue from the converged state: it must stay put immediately
  auto again = sharp_evolve(fx.channels, fx.cfg, fx.stepper(), fx.dt, 1000, sink);
  CHECK(again.converged);
  CHECK(again.converged_round == 0);
}

TEST_CASE("sharp_evolve: deterministic across repeated runs") {
  auto run_once = [](std::vector<double>& out_errors) {
    SharpGridFixture fx;
    auto rho0 = fx.disk(8, 14, 5);
    auto pi = fx.disk(22, 16, 5);
    fx.setup(rho0, pi);
    NullFrameSink sink;
    const auto report = sharp_evolve(fx.channels, fx.cfg, fx.stepper(), fx.dt, 1000, sink);
    out_errors = report.channels[0].errors;
  };
  std::vector<double> a, b;
  run_once(a);
  run_once(b);
  CHECK(a == b);
}

TEST_CASE("sharp_evolve: initial levels are remapped onto the configured pair") {
  SharpGridFixture fx;
  auto pi = fx.disk(16, 16, 9);
  auto rho0 = fx.disk(14, 14, 9);
  for (auto& v : rho0) v = (v == fx.cfg.pi_b) ? 0.7 : 0.2;  // foreign levels
  fx.setup(rho0, pi);
  NullFrameSink sink;
  const auto report = sharp_evolve(fx.channels, fx.cfg, fx.stepper(), fx.dt, 1000, sink);
  for (double v : fx.channels[0].rho) {
    CHECK((v == fx.cfg.pi_s || v == fx.cfg.pi_b));
  }
  CHECK(report.total_steps >= 0);

  // a three-valued initial field is rejected
  SharpGridFixture fx2;
  auto bad = fx2.disk(16, 16, 9);
  bad[0] = 0.3;
  bad[1] = 0.6;
  auto pi2 = fx2.disk(16, 16, 9);
  fx2.setup(bad, pi2);
  CHECK_THROWS_AS(sharp_evolve(fx2.channels, fx2.cfg, fx2.stepper(), fx2.dt, 1000, sink),
                  std::invalid_argument);
}

TEST_CASE("sharp_evolve: ramp schedule runs 2k linear steps in round k") {
  SharpGridFixture fx;
  fx.cfg.schedule.kind = ThresholdSchedule::Kind::Ramp;
  fx.cfg.max_rounds = 3;
  auto rho0 = fx.disk(10, 10, 7);
  auto pi = fx.disk(20, 20, 7);
  fx.setup(rho0, pi);
  NullFrameSink sink;
  const auto report = sharp_evolve(fx.channels, fx.cfg, fx.stepper(), fx.dt, 10000, sink);
  if (!report.converged) {
    // 2 + 4 + 6 linear steps plus one projection step per round
    CHECK(report.total_steps == (2 + 1) + (4 + 1) + (6 + 1));
  }
  CHECK(report.threshold_residuals.size() >= 3);
}
