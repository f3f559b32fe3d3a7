#pragma once

#include <Eigen/Dense>
#include <span>

#include "markov.hpp"
#include "report.hpp"

namespace fpmorph {

// Least-squares slope of log(error) versus step over the samples left after
// discarding the leading fraction, exponentiated to a per-step ratio.
// Non-positive entries inside the window mean the run already converged;
// the fit then uses the positive samples before the first such entry and
// sets converged_series.
RateFit fit_decay_rate(std::span<const double> errors, double discard_prefix = 0.5);

// Dense iteration matrix of the grid scheme acting on u = rho/pi. Assembly
// accepts single-row or single-column grids so tiny closed-form cases can be
// checked; the solver-facing types stay at >= 2 cells per direction.
Eigen::MatrixXd dense_grid_operator(int n_cols, int n_rows, double dx, double dy,
                                    std::span<const double> pi, double dt);

// Dense I + dt*B for the cloud scheme acting on u = rho/pi.
Eigen::MatrixXd dense_cloud_operator(const MarkovRates& rates);

// Second-largest eigenvalue magnitude of the iteration matrix. Verifies the
// Perron structure first: the largest eigenvalue must be 1 within 1e-10 and
// the constant vector must be fixed to the same tolerance. The weights make
// the operator self-adjoint, so a symmetric eigensolve applies. Oracle only:
// rejects problems above 2500 unknowns.
double dense_operator_mu2(const Eigen::MatrixXd& op, std::span<const double> weights);

double dense_operator_mu2_grid(int n_cols, int n_rows, double dx, double dy,
                               std::span<const double> pi, double dt);
double dense_operator_mu2_cloud(const MarkovRates& rates, std::span<const double> pi);

}  // namespace fpmorph
