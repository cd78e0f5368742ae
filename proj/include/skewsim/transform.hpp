#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "skewsim/core.hpp"

namespace skewsim {

/// Continuous, strictly increasing piecewise-linear map with F(0) = 0.
class PiecewiseLinearMap {
 public:
  PiecewiseLinearMap() : slopes_{1.0} { build(); }
  /// slopes[i] applies on piece i of `breaks` (right-continuous convention).
  PiecewiseLinearMap(std::vector<double> breaks, std::vector<double> slopes);

  double operator()(double x) const;
  double inverse(double y) const;
  double slope(double x) const;
  double slope_left(double x) const;

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& slopes() const { return slopes_; }

 private:
  void build();

  std::vector<double> breaks_;
  std::vector<double> slopes_;
  std::vector<double> images_;  // F(breaks_[i])
};

/// SDE dX = sigma(X) dB + drift(X) dt + int nu(dy) dL^y_t(X) with symmetric local times.
struct SkewSDE {
  PiecewiseFunction sigma;
  PiecewiseFunction drift;
  SignedAtomicMeasure nu;
};

SkewSDE make_skew_sde(PiecewiseFunction sigma, PiecewiseFunction drift, SignedAtomicMeasure nu);
/// sigma = 1, drift = 0, nu = beta delta_0.
SkewSDE skew_brownian_sde(const SkewParameter& skew);

/// f_nu(x) = exp(-2 nu^c((-inf, x])) prod_{y <= x} (1 - nu{y}) / (1 + nu{y}) and F_nu = int_0^x f_nu.
class LeGallFunction {
 public:
  explicit LeGallFunction(SignedAtomicMeasure nu);

  double f(double x) const;
  double f_left(double x) const;
  double F(double x) const;
  double F_inverse(double y) const;
  /// Continuous part of f'(x) (zero for purely atomic measures).
  double f_prime_continuous(double x) const;

  const SignedAtomicMeasure& measure() const { return nu_; }
  /// Exact piecewise-linear form of F when nu is purely atomic.
  const std::optional<PiecewiseLinearMap>& linear_form() const { return linear_; }

 private:
  double atomic_factor(double x, bool inclusive) const;
  double continuous_factor(double x) const;

  SignedAtomicMeasure nu_;
  std::vector<double> atom_x_;
  std::vector<double> atom_prod_;  // product over atoms with index <= i
  std::optional<PiecewiseLinearMap> linear_;
  std::vector<double> knots_;
  std::vector<double> knot_F_;
};

LeGallFunction legall_function(const SignedAtomicMeasure& nu);

/// nu(dx) = -f'(dx) / (f(x) + f(x-)): atoms at the candidate jump points, continuous density on
/// `support` from a five-point derivative of f with step `h`.
SignedAtomicMeasure recover_measure(const std::function<double(double)>& f, const std::function<double(double)>& f_left,
                                    std::span<const double> jump_points,
                                    std::optional<std::pair<double, double>> support = std::nullopt, double h = 1e-3);

/// Atomic measure of Y = F(X) from the symmetric Ito-Tanaka formula, for a piecewise-linear F:
/// mu{F(x)} = ((f+ + f-) nu{x} + f+ - f-) / (f+ (1 + nu{x}) + f- (1 - nu{x})).
SignedAtomicMeasure push_forward_measure(const SignedAtomicMeasure& nu, const PiecewiseLinearMap& map);

/// sigma = sqrt(a rho), drift = a' rho / 2 + b inside pieces, atoms (a+ - a-)/(a+ + a-) where a jumps.
SkewSDE sde_from_divergence(const PiecewiseDiffusion& coeffs);

struct SkewPoint {
  double x;     // location in the original coordinates
  double y;     // G(x)
  double beta;  // local-time weight of Y at y
  double alpha() const { return (1.0 + beta) / 2.0; }
};

struct ReductionOptions {
  /// Fold a non-zero drift into (a, rho) before reducing. Without it a drift is an error.
  bool remove_drift = false;
  /// Localisation window [-R, R] for the drift; 0 means "use the drift's own finite support".
  double window = 0.0;
  /// Cell width used to approximate the folded coefficients by constants.
  double cell = 0.01;
};

/// Y = G(X) with G(x) = int_0^x dz / sqrt(a rho) behaves like a Brownian motion with skew points.
struct BrownianReduction {
  PiecewiseLinearMap G;
  std::vector<SkewPoint> skew_points;
  /// Piecewise-constant drift-free coefficients actually reduced.
  PiecewiseDiffusion reduced;
  /// Sign s in (a e^{s h}, rho e^{-s h}) chosen by the scale-equality test (0 when no drift).
  int zvonkin_sign = 0;
  bool localized = false;

  double to_reduced(double x) const { return G(x); }
  double to_original(double y) const { return G.inverse(y); }
};

BrownianReduction brownian_reduction(const PiecewiseDiffusion& coeffs, const ReductionOptions& options = {});

/// Largest deviation between the slope ratio of the scale function of Y = G(X) across each skew
/// point and the ratio (1 - alpha)/alpha implied by that point's beta.
double reduction_scale_mismatch(const PiecewiseDiffusion& coeffs, const BrownianReduction& reduction);

}  // namespace skewsim
