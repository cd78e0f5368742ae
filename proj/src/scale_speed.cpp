#include "skewsim/scale_speed.hpp"

#include <algorithm>
#include <cmath>

#include "skewsim/numerics.hpp"

namespace skewsim {
namespace {

// int_0^d exp(k u) du
double exp_integral(double k, double d) {
  if (std::abs(k * d) < 1e-8) return d * (1.0 + 0.5 * k * d);
  return std::expm1(k * d) / k;
}

constexpr double kQuadTol = 1e-13;

}  // namespace

ScaleSpeedModel::ScaleSpeedModel(PiecewiseDiffusion coeffs) : coeffs_(std::move(coeffs)) {
  knots_ = coeffs_.breaks();
  knots_.push_back(0.0);
  std::sort(knots_.begin(), knots_.end());
  knots_.erase(std::unique(knots_.begin(), knots_.end()), knots_.end());

  const auto anchor = static_cast<std::size_t>(std::find(knots_.begin(), knots_.end(), 0.0) - knots_.begin());
  knot_values_.assign(knots_.size(), Values{0.0, 0.0, 0.0});
  for (std::size_t j = anchor + 1; j < knots_.size(); ++j)
    knot_values_[j] = integrate_from(coeffs_.piece_index(knots_[j - 1]), knots_[j - 1], knot_values_[j - 1], knots_[j]);
  for (std::size_t j = anchor; j-- > 0;)
    knot_values_[j] = integrate_from(coeffs_.piece_index(knots_[j]), knots_[j + 1], knot_values_[j + 1], knots_[j]);
}

ScaleSpeedModel ScaleSpeedModel::build(const PiecewiseDiffusion& coeffs) {
  return ScaleSpeedModel(coeffs.bounds() ? coeffs : validate_piecewise(coeffs));
}

ScaleSpeedModel ScaleSpeedModel::build(const SkewParameter& skew) {
  return build(PiecewiseDiffusion::skew_brownian(skew));
}

ScaleSpeedModel::Values ScaleSpeedModel::integrate_from(std::size_t piece, double ref, const Values& at_ref,
                                                        double x) const {
  const Coefficient& a = coeffs_.a().pieces()[piece];
  const Coefficient& rho = coeffs_.rho().pieces()[piece];
  const Coefficient& b = coeffs_.b().pieces()[piece];
  const double d = x - ref;
  if (a.is_constant() && rho.is_constant() && b.is_constant()) {
    const double c = 2.0 * b.constant() / (a.constant() * rho.constant());
    return Values{at_ref.h + c * d, at_ref.s + std::exp(-at_ref.h) / a.constant() * exp_integral(-c, d),
                  at_ref.v + std::exp(at_ref.h) / rho.constant() * exp_integral(c, d)};
  }
  auto h_at = [&](double u) {
    if (b.is_constant() && b.constant() == 0.0) return at_ref.h;
    return at_ref.h + numerics::integrate([&](double z) { return 2.0 * b(z) / (a(z) * rho(z)); }, ref, u, kQuadTol);
  };
  const double s = numerics::integrate([&](double u) { return std::exp(-h_at(u)) / a(u); }, ref, x, kQuadTol);
  const double v = numerics::integrate([&](double u) { return std::exp(h_at(u)) / rho(u); }, ref, x, kQuadTol);
  return Values{h_at(x), at_ref.s + s, at_ref.v + v};
}

ScaleSpeedModel::Values ScaleSpeedModel::raw(double x) const {
  if (x < knots_.front()) {
    return integrate_from(coeffs_.piece_index(knots_.front() - 1.0), knots_.front(), knot_values_.front(), x);
  }
  const auto ref = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), x) - knots_.begin()) - 1;
  return integrate_from(coeffs_.piece_index(knots_[ref]), knots_[ref], knot_values_[ref], x);
}

double ScaleSpeedModel::h(double x) const { return raw(x).h; }
double ScaleSpeedModel::scale(double x) const { return kappa_ * raw(x).s + lambda_s_; }
double ScaleSpeedModel::speed(double x) const { return raw(x).v / kappa_ + lambda_v_; }
double ScaleSpeedModel::scale_derivative(double x) const { return kappa_ * std::exp(-h(x)) / coeffs_.a()(x); }
double ScaleSpeedModel::speed_density(double x) const { return std::exp(h(x)) / coeffs_.rho()(x) / kappa_; }

double ScaleSpeedModel::scale_inverse(double s) const {
  double lo = -1.0;
  double hi = 1.0;
  for (int i = 0; scale(lo) > s; ++i) {
    if (i > 1100) throw NumericalError("scale_inverse: value " + format_value(s) + " below the range of S");
    lo *= 2.0;
  }
  for (int i = 0; scale(hi) < s; ++i) {
    if (i > 1100) throw NumericalError("scale_inverse: value " + format_value(s) + " above the range of S");
    hi *= 2.0;
  }
  const double tol = 1e-15 * std::max({1.0, std::abs(lo), std::abs(hi)});
  return numerics::find_root([&](double x) { return scale(x) - s; }, lo, hi, tol, "scale_inverse");
}

ScaleSpeedModel ScaleSpeedModel::rescaled(double kappa, double lambda_s, double lambda_v) const {
  if (!(kappa > 0.0)) throw DomainError("rescaled: kappa must be positive, got " + format_value(kappa));
  ScaleSpeedModel out = *this;
  out.kappa_ = kappa_ * kappa;
  out.lambda_s_ = kappa * lambda_s_ + lambda_s;
  out.lambda_v_ = lambda_v_ / kappa + lambda_v;
  return out;
}

double ScaleSpeedModel::green(double a, double b, double x, double y) const {
  const double sa = scale(a);
  const double sb = scale(b);
  const double lo = std::min(x, y);
  const double hi = std::max(x, y);
  return 2.0 * (scale(lo) - sa) * (sb - scale(hi)) / (sb - sa);
}

double hitting_probability(const ScaleSpeedModel& model, double x, double a, double b) {
  if (!(a < x && x < b))
    throw DomainError("hitting_probability: need a < x < b, got a = " + format_value(a) + ", x = " + format_value(x) +
                      ", b = " + format_value(b));
  const double sa = model.scale(a);
  return (model.scale(x) - sa) / (model.scale(b) - sa);
}

ExitMoments exit_time_moments(const ScaleSpeedModel& model, double x, double a, double b, ExitSide side) {
  if (!(a < b)) throw DomainError("exit_time_moments: degenerate interval (" + format_value(a) + ", " + format_value(b) + ")");
  if (!(a < x && x < b))
    throw DomainError("exit_time_moments: start " + format_value(x) + " outside (" + format_value(a) + ", " +
                      format_value(b) + ")");
  std::vector<double> splits = model.knots();
  splits.push_back(x);
  const double sa = model.scale(a);
  const double sb = model.scale(b);
  const double sx = model.scale(x);

  // G(x, y) V'(y), optionally weighted by the side probability v(y).
  auto integrand = [&](double y, int weight) {
    const double sy = model.scale(y);
    const double g = y < x ? 2.0 * (sy - sa) * (sb - sx) / (sb - sa) : 2.0 * (sx - sa) * (sb - sy) / (sb - sa);
    double w = 1.0;
    if (weight > 0) w = (sy - sa) / (sb - sa);
    if (weight < 0) w = (sb - sy) / (sb - sa);
    return g * w * model.speed_density(y);
  };

  ExitMoments out{};
  out.expected = numerics::integrate_split([&](double y) { return integrand(y, 0); }, a, b, splits, 1e-10);
  out.side_probability = 1.0;
  if (side == ExitSide::either) return out;

  const int weight = side == ExitSide::right ? 1 : -1;
  const double v = side == ExitSide::right ? (sx - sa) / (sb - sa) : (sb - sx) / (sb - sa);
  const double u = numerics::integrate_split([&](double y) { return integrand(y, weight); }, a, b, splits, 1e-10);
  out.side_probability = v;
  out.conditional = u / v;
  return out;
}

}  // namespace skewsim
