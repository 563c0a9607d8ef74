#pragma once

#include <complex>
#include <functional>

namespace clpaths {

struct QuadratureEstimate {
  std::complex<double> value;
  double abs_err = 0.0;
  double l1 = 0.0;  // integral of |f|, used for relative acceptance
  bool converged = false;
};

/// Globally adaptive 15-point Gauss-Kronrod rule on [a, b] for a complex
/// integrand of a real parameter. Bisects the interval with the largest error
/// estimate until the total error is below max(abs_tol, rel_tol * l1) or
/// max_intervals is reached (converged = false then).
QuadratureEstimate gauss_kronrod(const std::function<std::complex<double>(double)>& f, double a,
                                 double b, double abs_tol, double rel_tol, int max_intervals = 2000);

}  // namespace clpaths
