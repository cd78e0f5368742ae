#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace skewsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or input lies outside its admissible domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure (quadrature, root bracket, series) failed to meet its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

std::string format_value(double v);

// ---------------------------------------------------------------------------
// Skewness parameter

struct Alpha {
  double value;
};
struct Beta {
  double value;
};
struct Q {
  double value;
};
/// Flux coefficients on either side of an interface; alpha = a_plus / (a_plus + a_minus).
struct FluxPair {
  double a_plus;
  double a_minus;
};

using SkewSpec = std::variant<Alpha, Beta, Q, FluxPair>;

/// The triple (alpha, beta, q) with beta = q = 2 alpha - 1.
class SkewParameter {
 public:
  SkewParameter() = default;

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double q() const { return beta_; }

  bool operator==(const SkewParameter&) const = default;

 private:
  friend SkewParameter make_skew(const SkewSpec& spec);
  SkewParameter(double alpha, double beta) : alpha_(alpha), beta_(beta) {}

  double alpha_ = 0.5;
  double beta_ = 0.0;
};

SkewParameter make_skew(const SkewSpec& spec);

inline SkewParameter skew_from_alpha(double alpha) { return make_skew(Alpha{alpha}); }
inline SkewParameter skew_from_beta(double beta) { return make_skew(Beta{beta}); }

// ---------------------------------------------------------------------------
// Piecewise coefficients

/// A coefficient on one piece: either a constant or a user evaluator.
class Coefficient {
 public:
  Coefficient(double value) : value_(value) {}  // NOLINT(google-explicit-constructor)
  explicit Coefficient(std::function<double(double)> fn) : fn_(std::move(fn)) {}

  double operator()(double x) const { return fn_ ? fn_(x) : value_; }
  bool is_constant() const { return !fn_; }
  double constant() const { return value_; }

 private:
  double value_ = 0.0;
  std::function<double(double)> fn_;
};

/// A right-continuous function given on the pieces delimited by ascending breakpoints.
/// Piece i covers [breaks[i-1], breaks[i]) with breaks[-1] = -inf and breaks[n] = +inf.
class PiecewiseFunction {
 public:
  PiecewiseFunction() : pieces_{Coefficient(0.0)} {}
  PiecewiseFunction(double value) : pieces_{Coefficient(value)} {}  // NOLINT
  PiecewiseFunction(std::vector<double> breaks, std::vector<Coefficient> pieces);

  double operator()(double x) const { return pieces_[piece_index(x)](x); }
  double left_limit(double x) const;
  std::size_t piece_index(double x) const;

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<Coefficient>& pieces() const { return pieces_; }
  bool is_piecewise_constant() const;
  bool is_zero() const;

  /// Lower/upper end of piece i (may be infinite).
  double piece_lo(std::size_t i) const;
  double piece_hi(std::size_t i) const;

 private:
  std::vector<double> breaks_;
  std::vector<Coefficient> pieces_;
};

struct EllipticityBounds {
  double lambda_lo;
  double lambda_hi;
};

/// Coefficients (a, rho, b) of the operator L = (rho/2)(a u')' + b u'.
class PiecewiseDiffusion {
 public:
  PiecewiseDiffusion(std::vector<double> breaks, std::vector<Coefficient> a,
                     std::vector<Coefficient> rho, std::vector<Coefficient> b);

  static PiecewiseDiffusion brownian();
  static PiecewiseDiffusion piecewise_constant(std::vector<double> breaks, std::vector<double> a,
                                               std::vector<double> rho, std::vector<double> b);
  /// a = 1 - alpha on x < 0, alpha on x >= 0, rho = 1/a, b = 0.
  static PiecewiseDiffusion skew_brownian(const SkewParameter& skew);
  /// a = rho = 1 with the given drift.
  static PiecewiseDiffusion with_drift(PiecewiseFunction b);

  const std::vector<double>& breaks() const { return a_.breaks(); }
  std::size_t piece_count() const { return a_.pieces().size(); }
  std::size_t piece_index(double x) const { return a_.piece_index(x); }

  const PiecewiseFunction& a() const { return a_; }
  const PiecewiseFunction& rho() const { return rho_; }
  const PiecewiseFunction& b() const { return b_; }

  bool is_piecewise_constant() const;
  bool is_drift_free() const { return b_.is_zero(); }

  const std::optional<EllipticityBounds>& bounds() const { return bounds_; }

 private:
  friend PiecewiseDiffusion validate_piecewise(const PiecewiseDiffusion& coeffs);
  PiecewiseDiffusion(PiecewiseFunction a, PiecewiseFunction rho, PiecewiseFunction b);

  PiecewiseFunction a_;
  PiecewiseFunction rho_;
  PiecewiseFunction b_;
  std::optional<EllipticityBounds> bounds_;
};

/// Checks breakpoint order, finiteness and uniform ellipticity. Evaluator pieces are
/// probed on a dense lattice; unbounded end pieces are probed over a window of width 64.
PiecewiseDiffusion validate_piecewise(const PiecewiseDiffusion& coeffs);

// ---------------------------------------------------------------------------
// Signed measures with atoms of weight strictly inside (-1, 1)

struct ContinuousDensity {
  std::function<double(double)> density;
  double lo;
  double hi;
};

class SignedAtomicMeasure {
 public:
  SignedAtomicMeasure() = default;
  explicit SignedAtomicMeasure(std::map<double, double> atoms,
                               std::optional<ContinuousDensity> continuous = std::nullopt);

  static SignedAtomicMeasure dirac(double location, double weight);

  const std::map<double, double>& atoms() const { return atoms_; }
  const std::optional<ContinuousDensity>& continuous_part() const { return continuous_; }
  bool empty() const { return atoms_.empty() && !continuous_; }

  /// nu^c((-inf, x]) by adaptive quadrature.
  double continuous_mass_below(double x) const;
  double continuous_density(double x) const;

 private:
  std::map<double, double> atoms_;
  std::optional<ContinuousDensity> continuous_;
};

// ---------------------------------------------------------------------------
// Sampled paths

class SampledPath {
 public:
  SampledPath() = default;
  /// Uniform grid t_i = t0 + i dt.
  SampledPath(double t0, double dt, std::vector<double> values);
  /// Explicit, strictly increasing event times.
  SampledPath(std::vector<double> times, std::vector<double> values, bool skeleton);

  std::size_t size() const { return values_.size(); }
  double time(std::size_t i) const { return times_.empty() ? t0_ + dt_ * static_cast<double>(i) : times_[i]; }
  double value(std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  bool uniform() const { return times_.empty(); }
  double t0() const { return t0_; }
  double dt() const { return dt_; }
  bool skeleton() const { return skeleton_; }
  double terminal_time() const { return time(size() - 1); }
  double terminal_value() const { return values_.back(); }

  const std::optional<std::vector<double>>& noise() const { return noise_; }
  void set_noise(std::vector<double> noise);

 private:
  double t0_ = 0.0;
  double dt_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
  std::optional<std::vector<double>> noise_;
  bool skeleton_ = false;
};

}  // namespace skewsim
