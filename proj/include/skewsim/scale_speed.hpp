#pragma once

#include <optional>
#include <vector>

#include "skewsim/core.hpp"

namespace skewsim {

/// Scale function S and integrated speed measure V of L = (rho/2)(a u')' + b u'.
///
///   h(x) = 2 int_0^x b / (a rho),   S' = exp(-h) / a,   V' = exp(h) / rho,
///
/// normalised by S(0) = V(0) = h(0) = 0, so that L = (1/2) d/dV d/dS.
/// Piecewise-constant pieces are integrated in closed form, evaluator pieces by quadrature.
class ScaleSpeedModel {
 public:
  static ScaleSpeedModel build(const PiecewiseDiffusion& coeffs);
  static ScaleSpeedModel build(const SkewParameter& skew);

  double h(double x) const;
  double scale(double x) const;
  double speed(double x) const;
  double scale_derivative(double x) const;
  double speed_density(double x) const;
  double scale_inverse(double s) const;

  /// The pair (kappa S + lambda_s, V / kappa + lambda_v); describes the same process.
  ScaleSpeedModel rescaled(double kappa, double lambda_s, double lambda_v) const;

  /// Green function of the interval (a, b) with the factor-2 convention.
  double green(double a, double b, double x, double y) const;

  /// Knots where the integrands may have kinks: breakpoints and 0.
  const std::vector<double>& knots() const { return knots_; }
  const PiecewiseDiffusion& coefficients() const { return coeffs_; }

 private:
  struct Values {
    double h;
    double s;
    double v;
  };

  explicit ScaleSpeedModel(PiecewiseDiffusion coeffs);
  Values integrate_from(std::size_t piece, double ref, const Values& at_ref, double x) const;
  Values raw(double x) const;

  PiecewiseDiffusion coeffs_;
  std::vector<double> knots_;
  std::vector<Values> knot_values_;
  double kappa_ = 1.0;
  double lambda_s_ = 0.0;
  double lambda_v_ = 0.0;
};

/// P_x[hit b before a] = (S(x) - S(a)) / (S(b) - S(a)).
double hitting_probability(const ScaleSpeedModel& model, double x, double a, double b);

enum class ExitSide { either, left, right };

struct ExitMoments {
  /// E_x[tau_(a,b)].
  double expected;
  /// Probability of the requested side (1 for `either`).
  double side_probability;
  /// E_x[tau | exit on the requested side]; empty for `either`.
  std::optional<double> conditional;
};

ExitMoments exit_time_moments(const ScaleSpeedModel& model, double x, double a, double b,
                              ExitSide side = ExitSide::either);

}  // namespace skewsim
