#pragma once

#include <functional>

#include "fnirs/array.hpp"

namespace fnirs {

using ScalarFn = std::function<double(const Array&)>;

/// Central-difference check of an analytic gradient.
///
/// Returns max over coordinates of |analytic - numeric| / max(1e-12, |analytic| + |numeric|).
/// Throws std::domain_error if f evaluates to NaN at any probe point.
double finite_diff_check(const ScalarFn& f, const Array& x, const Array& analytic_grad,
                         double eps = 1e-5);

/// Central-difference gradient of f at x.
Array numeric_gradient(const ScalarFn& f, const Array& x, double eps = 1e-5);

/// The relative-error measure used by finite_diff_check.
double max_relative_error(const Array& analytic, const Array& numeric);

}  // namespace fnirs
