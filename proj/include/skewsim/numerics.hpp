#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>

namespace skewsim::numerics {

/// Adaptive Gauss-Kronrod (21-point) quadrature on a finite interval with an absolute
/// error target. Throws NumericalError when the panel depth is exhausted.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-10,
                 int max_depth = 40);

/// Integrates over [a, b] after splitting at every interior point of `splits`.
double integrate_split(const std::function<double(double)>& f, double a, double b, std::span<const double> splits,
                       double abs_tol = 1e-10);

/// Root of a monotone function on [lo, hi] to absolute tolerance `x_tol` (TOMS 748).
/// The bracket must change sign; otherwise NumericalError names `what`.
double find_root(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                 const std::string& what);

/// Standard normal CDF and density.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

}  // namespace skewsim::numerics
