#include "metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace fpmorph {

double rel_rms_error(std::span<const double> rho, std::span<const double> pi) {
  if (rho.size() != pi.size() || rho.empty()) throw std::invalid_argument("field size mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const double d = rho[k] / pi[k] - 1.0;
    acc += d * d;
  }
  return std::sqrt(acc / double(rho.size()));
}

double weighted_sum(std::span<const double> w, std::span<const double> v) {
  if (w.size() != v.size()) throw std::invalid_argument("field size mismatch");
  double sum = 0.0, comp = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double term = w[k] * v[k];
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

}  // namespace fpmorph
