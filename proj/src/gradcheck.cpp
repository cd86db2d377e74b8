#include "fnirs/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fnirs {

Array numeric_gradient(const ScalarFn& f, const Array& x, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  Array probe = x;
  Array grad(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double up = f(probe);
    probe[i] = orig - eps;
    const double down = f(probe);
    probe[i] = orig;
    if (std::isnan(up) || std::isnan(down))
      throw std::domain_error("objective returned NaN at coordinate " + std::to_string(i));
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

double max_relative_error(const Array& analytic, const Array& numeric) {
  require_shape(numeric, analytic.shape(), "numeric gradient");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i], n = numeric[i];
    const double err = std::abs(a - n) / std::max(1e-12, std::abs(a) + std::abs(n));
    worst = std::max(worst, err);
  }
  return worst;
}

double finite_diff_check(const ScalarFn& f, const Array& x, const Array& analytic_grad, double eps) {
  require_shape(analytic_grad, x.shape(), "analytic gradient");
  return max_relative_error(analytic_grad, numeric_gradient(f, x, eps));
}

}  // namespace fnirs
