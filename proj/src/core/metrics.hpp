#pragma once

#include <span>

namespace fpmorph {

// sqrt(mean((rho/pi - 1)^2)) -- the convergence diagnostic recorded per step.
double rel_rms_error(std::span<const double> rho, std::span<const double> pi);

// Neumaier-compensated sum of w[k] * v[k]; mass series feed 1e-12-level
// drift checks, so plain summation error would dominate the signal.
double weighted_sum(std::span<const double> w, std::span<const double> v);

}  // namespace fpmorph
