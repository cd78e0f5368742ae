#include "skewsim/density.hpp"

#include <array>
#include <cmath>

#include "skewsim/numerics.hpp"

namespace skewsim {
namespace {

using numerics::normal_cdf;

void require_positive_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("transition law: t must be positive, got " + format_value(t));
}

double gauss(double t, double z) { return std::exp(-z * z / (2.0 * t)) / std::sqrt(2.0 * M_PI * t); }

// CDF for a start point x >= 0.
double cdf_nonneg_start(double t, double x, double y, double beta) {
  const double s = std::sqrt(t);
  if (y < 0.0) return (1.0 - beta) * normal_cdf((y - x) / s);
  return normal_cdf((y - x) / s) - beta * normal_cdf(-(x + y) / s);
}

}  // namespace

double TransitionDensityModel::density(double t, double x, double y) const {
  require_positive_time(t);
  const double beta = skew_.beta();
  // y = 0 belongs to the closed positive half-line, matching the right-continuous convention.
  const bool y_pos = y >= 0.0;
  const bool same_side = (x == 0.0) || (x > 0.0) == y_pos;
  const double sy = y_pos ? 1.0 : -1.0;
  if (same_side) return gauss(t, x - y) + sy * beta * gauss(t, std::abs(x) + std::abs(y));
  return (1.0 + sy * beta) * gauss(t, x - y);
}

double TransitionDensityModel::cdf(double t, double x, double y) const {
  require_positive_time(t);
  if (y == std::numeric_limits<double>::infinity()) return 1.0;
  if (y == -std::numeric_limits<double>::infinity()) return 0.0;
  if (x >= 0.0) return cdf_nonneg_start(t, x, y, skew_.beta());
  // Mirror: X from x under alpha equals -X' from -x under 1 - alpha.
  return 1.0 - cdf_nonneg_start(t, -x, -y, -skew_.beta());
}

double TransitionDensityModel::quantile(double t, double x, double u) const {
  require_positive_time(t);
  if (!(u > 0.0 && u < 1.0)) throw DomainError("transition quantile: u must lie in (0,1), got " + format_value(u));
  const double width = 40.0 * std::sqrt(t);
  return numerics::find_root([&](double y) { return cdf(t, x, y) - u; }, x - width, x + width, 1e-12,
                             "transition quantile");
}

double TransitionDensityModel::sample(double t, double x, RngStream& rng) const {
  return quantile(t, x, rng.uniform());
}

double TransitionDensityModel::semigroup_apply(double t, const std::function<double(double)>& phi, double x) const {
  require_positive_time(t);
  const double width = 40.0 * std::sqrt(t);
  const std::array<double, 2> splits{0.0, x};
  return numerics::integrate_split([&](double y) { return phi(y) * density(t, x, y); }, x - width, x + width, splits,
                                   1e-9);
}

double transition_density(double t, double x, double y, const SkewParameter& skew) {
  return TransitionDensityModel(skew).density(t, x, y);
}

double transition_cdf(double t, double x, double y, const SkewParameter& skew) {
  return TransitionDensityModel(skew).cdf(t, x, y);
}

double semigroup_apply(double t, const std::function<double(double)>& phi, double x, const SkewParameter& skew) {
  return TransitionDensityModel(skew).semigroup_apply(t, phi, x);
}

TransitionDraw transition_cdf_and_sample(double t, double x, const SkewParameter& skew, RngStream& rng) {
  TransitionDensityModel model(skew);
  const double draw = model.sample(t, x, rng);
  return {[model, t, x](double y) { return model.cdf(t, x, y); }, draw};
}

}  // namespace skewsim
