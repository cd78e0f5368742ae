#pragma once

#include <functional>

#include "skewsim/core.hpp"
#include "skewsim/rng.hpp"

namespace skewsim {

/// Transition law of the skew Brownian motion SBM(alpha).
///
/// With g the centred Gaussian kernel of variance t:
///   same closed half-line:  q(t,x,y) = g(x-y) + sgn(y) beta g(|x|+|y|)
///   opposite signs:         q(t,x,y) = (1 + sgn(y) beta) g(x-y)
/// The density is continuous in x and jumps in y at 0 unless alpha = 1/2.
class TransitionDensityModel {
 public:
  explicit TransitionDensityModel(SkewParameter skew) : skew_(skew) {}

  const SkewParameter& skew() const { return skew_; }

  double density(double t, double x, double y) const;
  /// P_x[X_t <= y]; a signed combination of Gaussian CDF terms.
  double cdf(double t, double x, double y) const;
  /// Inverse CDF by bracketed root finding to absolute tolerance 1e-12.
  double quantile(double t, double x, double u) const;
  /// One exact draw of X_t given X_0 = x (one uniform per draw).
  double sample(double t, double x, RngStream& rng) const;
  /// Q_t phi(x) by adaptive quadrature (absolute tolerance 1e-9). `phi` must be bounded.
  double semigroup_apply(double t, const std::function<double(double)>& phi, double x) const;

 private:
  SkewParameter skew_;
};

double transition_density(double t, double x, double y, const SkewParameter& skew);
double transition_cdf(double t, double x, double y, const SkewParameter& skew);
double semigroup_apply(double t, const std::function<double(double)>& phi, double x, const SkewParameter& skew);

struct TransitionDraw {
  std::function<double(double)> cdf;
  double draw;
};

/// Returns the exact CDF of X_t (as a function of y) and one draw of X_t.
TransitionDraw transition_cdf_and_sample(double t, double x, const SkewParameter& skew, RngStream& rng);

}  // namespace skewsim
