#include "skewsim/killed_bm.hpp"

#include <cmath>

#include "skewsim/core.hpp"
#include "skewsim/numerics.hpp"

namespace skewsim::killed {
namespace {

constexpr double kTermTol = 1e-16;
constexpr int kMaxTerms = 400;

bool use_images(double t, double L, Form form) {
  if (form == Form::images) return true;
  if (form == Form::eigen) return false;
  const double h = 0.5 * L;
  return t / (h * h) < 0.5;
}

void check(double t, double u, double L) {
  if (!(L > 0.0)) throw DomainError("killed BM: interval length must be positive, got " + format_value(L));
  if (!(u > 0.0 && u < L)) throw DomainError("killed BM: start " + format_value(u) + " outside (0, " + format_value(L) + ")");
  if (!(t >= 0.0)) throw DomainError("killed BM: negative time " + format_value(t));
}

[[noreturn]] void diverged(const char* what, double t, double L) {
  throw NumericalError(std::string("killed BM: ") + what + " series did not converge at t/L^2 = " + format_value(t / (L * L)));
}

double right_images(double t, double u, double L) {
  const double s = std::sqrt(2.0 * t);
  double sum = 0.0;
  for (int k = 0; k < kMaxTerms; ++k) {
    const double a = std::erfc(((2 * k + 1) * L - u) / s);
    const double b = std::erfc(((2 * k + 1) * L + u) / s);
    sum += a - b;
    if (a < kTermTol) return sum;
  }
  diverged("images", t, L);
}

double right_eigen(double t, double u, double L) {
  double sum = u / L;
  for (int k = 1; k < kMaxTerms; ++k) {
    const double kp = k * M_PI;
    const double decay = std::exp(-kp * kp * t / (2.0 * L * L));
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    sum -= 2.0 / kp * sign * std::sin(kp * u / L) * decay;
    if (2.0 / kp * decay < kTermTol) return sum;
  }
  diverged("sine", t, L);
}

}  // namespace

double right_exit_cdf(double t, double u, double L, Form form) {
  check(t, u, L);
  if (t == 0.0) return 0.0;
  return use_images(t, L, form) ? right_images(t, u, L) : right_eigen(t, u, L);
}

double left_exit_cdf(double t, double u, double L, Form form) {
  check(t, u, L);
  return right_exit_cdf(t, L - u, L, form);
}

double survival(double t, double u, double L, Form form) {
  check(t, u, L);
  if (t == 0.0) return 1.0;
  if (use_images(t, L, form)) return 1.0 - right_images(t, u, L) - right_images(t, L - u, L);
  double sum = 0.0;
  for (int k = 1; k < kMaxTerms; k += 2) {
    const double kp = k * M_PI;
    const double decay = std::exp(-kp * kp * t / (2.0 * L * L));
    sum += 4.0 / kp * std::sin(kp * u / L) * decay;
    if (4.0 / kp * decay < kTermTol) return sum;
  }
  diverged("sine", t, L);
}

double killed_cdf(double t, double u, double v, double L, Form form) {
  check(t, u, L);
  if (!(v >= 0.0 && v <= L)) throw DomainError("killed BM: level " + format_value(v) + " outside [0, L]");
  if (t == 0.0) return v >= u ? 1.0 : 0.0;
  if (use_images(t, L, form)) {
    const double s = std::sqrt(t);
    auto term = [&](int k) {
      const double shift = 2.0 * k * L;
      using numerics::normal_cdf;
      return normal_cdf((v - u + shift) / s) - normal_cdf((-u + shift) / s) - normal_cdf((v + u + shift) / s) +
             normal_cdf((u + shift) / s);
    };
    double sum = term(0);
    for (int k = 1; k < kMaxTerms; ++k) {
      const double a = term(k);
      const double b = term(-k);
      sum += a + b;
      // Each term is bounded by the Gaussian tail beyond (2k - 1) L.
      if (std::erfc(((2 * k - 1) * L) / std::sqrt(2.0 * t)) < kTermTol) return sum;
    }
    diverged("images", t, L);
  }
  double sum = 0.0;
  for (int k = 1; k < kMaxTerms; ++k) {
    const double kp = k * M_PI;
    const double decay = std::exp(-kp * kp * t / (2.0 * L * L));
    sum += 2.0 / kp * std::sin(kp * u / L) * (1.0 - std::cos(kp * v / L)) * decay;
    if (4.0 / kp * decay < kTermTol) return sum;
  }
  diverged("sine", t, L);
}

}  // namespace skewsim::killed
