#include "diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace fpmorph {

namespace {

constexpr int kOracleCap = 2500;

inline int clamp_idx(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

}  // namespace

RateFit fit_decay_rate(std::span<const double> errors, double discard_prefix) {
  RateFit fit;
  if (discard_prefix < 0.0 || discard_prefix >= 1.0) {
    throw std::invalid_argument("discard_prefix must be in [0, 1)");
  }
  const std::size_t start = std::size_t(double(errors.size()) * discard_prefix);
  if (errors.size() < start + 10) return fit;  // valid stays false

  std::size_t stop = errors.size();
  for (std::size_t k = start; k < errors.size(); ++k) {
    if (!(errors[k] > 0.0)) {
      fit.converged_series = true;
      stop = k;
      break;
    }
  }
  if (stop - start < 2) {
    fit.valid = true;
    fit.rate = 0.0;
    fit.r_squared = 0.0;
    fit.decaying = true;
    return fit;
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = double(stop - start);
  for (std::size_t k = start; k < stop; ++k) {
    const double x = double(k);
    const double y = std::log(errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;

  double ss_res = 0.0, ss_tot = 0.0;
  const double mean_y = sy / m;
  for (std::size_t k = start; k < stop; ++k) {
    const double y = std::log(errors[k]);
    const double pred = intercept + slope * double(k);
    ss_res += (y - pred) * (y - pred);
    ss_tot += (y - mean_y) * (y - mean_y);
  }

  fit.valid = true;
  fit.rate = std::exp(slope);
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  fit.decaying = fit.rate < 1.0 - 1e-12;
  return fit;
}

Eigen::MatrixXd dense_grid_operator(int n_cols, int n_rows, double dx, double dy,
                                    std::span<const double> pi, double dt) {
  if (n_cols < 1 || n_rows < 1 || !(dx > 0.0) || !(dy > 0.0) || !(dt > 0.0)) {
    throw std::invalid_argument("invalid grid operator parameters");
  }
  const int n = n_cols * n_rows;
  if (int(pi.size()) != n) throw std::invalid_argument("equilibrium size mismatch");
  for (double p : pi) {
    if (!(p > 0.0)) throw std::invalid_argument("equilibrium must be strictly positive");
  }

  const double ax = 1.0 / (dx * dx), ay = 1.0 / (dy * dy);
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n_rows; ++j) {
    for (int i = 0; i < n_cols; ++i) {
      const int r = j * n_cols + i;
      const double p = pi[std::size_t(r)];
      double lambda = 0.0;
      const int nbr[4][3] = {{i + 1, j, 0}, {i - 1, j, 0}, {i, j + 1, 1}, {i, j - 1, 1}};
      op(r, r) += 1.0;
      for (const auto& nb : nbr) {
        const int ic = clamp_idx(nb[0], n_cols), jc = clamp_idx(nb[1], n_rows);
        const int q = jc * n_cols + ic;
        const double coeff = (p + pi[std::size_t(q)]) / (2.0 * p) * (nb[2] == 0 ? ax : ay);
        lambda += coeff;
        op(r, q) += dt * coeff;
      }
      op.row(r) /= (1.0 + dt * lambda);
    }
  }
  return op;
}

Eigen::MatrixXd dense_cloud_operator(const MarkovRates& rates) {
  const int n = rates.size();
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double lam_dt = rates.lambda[std::size_t(i)] * rates.dt;
    op(i, i) = 1.0 / (1.0 + lam_dt);
    const auto& nb = rates.neighbors[std::size_t(i)];
    for (int s = 0; s < int(nb.size()); ++s) {
      op(i, nb[std::size_t(s)]) +=
          lam_dt / (1.0 + lam_dt) * rates.p_out[std::size_t(i)][std::size_t(s)];
    }
  }
  return op;
}

double dense_operator_mu2(const Eigen::MatrixXd& op, std::span<const double> weights) {
  const int n = int(op.rows());
  if (n > kOracleCap) throw std::invalid_argument("dense spectral oracle capped at 2500 unknowns");
  if (int(weights.size()) != n) throw std::invalid_argument("weight size mismatch");

  // Perron structure: constant vector fixed, spectral radius 1.
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const double row_defect = (op * ones - ones).lpNorm<Eigen::Infinity>();
  if (row_defect > 1e-10) {
    throw std::runtime_error("iteration matrix does not fix the constant vector");
  }

  // Similarity transform with sqrt(w): S = W^(1/2) A W^(-1/2) is symmetric
  // because A is self-adjoint in the w-weighted inner product.
  Eigen::VectorXd sqw(n), inv_sqw(n);
  for (int i = 0; i < n; ++i) {
    if (!(weights[std::size_t(i)] > 0.0)) throw std::invalid_argument("weights must be positive");
    sqw(i) = std::sqrt(weights[std::size_t(i)]);
    inv_sqw(i) = 1.0 / sqw(i);
  }
  const Eigen::MatrixXd sym = sqw.asDiagonal() * op * inv_sqw.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("dense eigensolve failed");
  const Eigen::VectorXd ev = solver.eigenvalues();  // ascending
  const double mu1 = ev(n - 1);
  if (std::abs(mu1 - 1.0) > 1e-10) {
    throw std::runtime_error("largest eigenvalue of the iteration matrix is not 1");
  }
  if (n == 1) return 0.0;
  return std::max(std::abs(ev(0)), std::abs(ev(n - 2)));
}

double dense_operator_mu2_grid(int n_cols, int n_rows, double dx, double dy,
                               std::span<const double> pi, double dt) {
  const Eigen::MatrixXd op = dense_grid_operator(n_cols, n_rows, dx, dy, pi, dt);
  const int n = n_cols * n_rows;
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int j = 0; j < n_rows; ++j) {
    for (int i = 0; i < n_cols; ++i) {
      const int r = j * n_cols + i;
      const double p = pi[std::size_t(r)];
      double lambda = 0.0;
      const int nbr[4][3] = {{i + 1, j, 0}, {i - 1, j, 0}, {i, j + 1, 1}, {i, j - 1, 1}};
      for (const auto& nb : nbr) {
        const int ic = clamp_idx(nb[0], n_cols), jc = clamp_idx(nb[1], n_rows);
        const int q = jc * n_cols + ic;
        const double h2 = nb[2] == 0 ? dx * dx : dy * dy;
        lambda += (p + pi[std::size_t(q)]) / (2.0 * p * h2);
      }
      w[std::size_t(r)] = (1.0 + dt * lambda) * p;
    }
  }
  return dense_operator_mu2(op, w);
}

double dense_operator_mu2_cloud(const MarkovRates& rates, std::span<const double> pi) {
  const Eigen::MatrixXd op = dense_cloud_operator(rates);
  const int n = rates.size();
  if (int(pi.size()) != n) throw std::invalid_argument("equilibrium size mismatch");
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[std::size_t(i)] = rates.mass_weight[std::size_t(i)] * pi[std::size_t(i)];
  }
  return dense_operator_mu2(op, w);
}

}  // namespace fpmorph
