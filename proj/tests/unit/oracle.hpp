#pragma once

#include <cmath>
#include <functional>

// Test-side numerics, deliberately independent of the library's quadrature.
namespace oracle {

inline double gauss(double z, double t) { return std::exp(-z * z / (2.0 * t)) / std::sqrt(2.0 * M_PI * t); }
inline double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace oracle
