#pragma once

#include <functional>

#include "affsup/matrix.hpp"

namespace affsup {

// Central-difference gradient check in double precision. Returns the maximum
// over entries of |central_difference - analytic| / max(1, |analytic|).
// step must lie in [1e-7, 1e-3]; a non-finite f at any probe point throws
// NumericError.
double grad_check(const std::function<double(const MatD&)>& f,
                  const MatD& analytic_grad, const MatD& x, double step);

}  // namespace affsup
