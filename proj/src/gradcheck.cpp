#include "affsup/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace affsup {

double grad_check(const std::function<double(const MatD&)>& f,
                  const MatD& analytic_grad, const MatD& x, double step) {
  if (!(step >= 1e-7 && step <= 1e-3))
    throw ConfigError("grad_check: step must be in [1e-7, 1e-3]");
  check_same_shape(analytic_grad, x, "grad_check");

  MatD probe = x;
  double max_err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + step;
    const double f_plus = f(probe);
    probe.data()[i] = orig - step;
    const double f_minus = f(probe);
    probe.data()[i] = orig;
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
      throw NumericError("grad_check: non-finite objective at probe point");
    const double cd = (f_plus - f_minus) / (2.0 * step);
    const double g = analytic_grad.data()[i];
    const double err = std::abs(cd - g) / std::max(1.0, std::abs(g));
    max_err = std::max(max_err, err);
  }
  return max_err;
}

}  // namespace affsup
