#include "skewsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "skewsim/numerics.hpp"

namespace skewsim {

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------

SkewParameter make_skew(const SkewSpec& spec) {
  auto from_alpha = [](double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("skew: alpha must lie in [0,1], got " + format_value(alpha));
    return SkewParameter(alpha, 2.0 * alpha - 1.0);
  };
  auto from_beta = [](double beta, const char* name) {
    if (!(beta >= -1.0 && beta <= 1.0))
      throw DomainError(std::string("skew: ") + name + " must lie in [-1,1], got " + format_value(beta));
    return SkewParameter((1.0 + beta) / 2.0, beta);
  };
  return std::visit(
      [&](const auto& s) -> SkewParameter {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Alpha>) {
          return from_alpha(s.value);
        } else if constexpr (std::is_same_v<T, Beta>) {
          return from_beta(s.value, "beta");
        } else if constexpr (std::is_same_v<T, Q>) {
          return from_beta(s.value, "q");
        } else {
          if (!(s.a_plus > 0.0) || !std::isfinite(s.a_plus))
            throw DomainError("skew: flux a_plus must be positive, got " + format_value(s.a_plus));
          if (!(s.a_minus > 0.0) || !std::isfinite(s.a_minus))
            throw DomainError("skew: flux a_minus must be positive, got " + format_value(s.a_minus));
          const double sum = s.a_plus + s.a_minus;
          return SkewParameter(s.a_plus / sum, (s.a_plus - s.a_minus) / sum);
        }
      },
      spec);
}

// ---------------------------------------------------------------------------

PiecewiseFunction::PiecewiseFunction(std::vector<double> breaks, std::vector<Coefficient> pieces)
    : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
  if (pieces_.size() != breaks_.size() + 1)
    throw DomainError("piecewise function: expected " + std::to_string(breaks_.size() + 1) + " pieces, got " +
                      std::to_string(pieces_.size()));
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    if (!std::isfinite(breaks_[i])) throw DomainError("piecewise function: non-finite breakpoint");
    if (i > 0 && !(breaks_[i] > breaks_[i - 1]))
      throw DomainError("piecewise function: breakpoints not strictly ascending at " + format_value(breaks_[i]));
  }
}

std::size_t PiecewiseFunction::piece_index(double x) const {
  return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin());
}

double PiecewiseFunction::left_limit(double x) const {
  const auto it = std::lower_bound(breaks_.begin(), breaks_.end(), x);
  const auto idx = static_cast<std::size_t>(it - breaks_.begin());
  return pieces_[idx](x);
}

bool PiecewiseFunction::is_piecewise_constant() const {
  return std::all_of(pieces_.begin(), pieces_.end(), [](const Coefficient& c) { return c.is_constant(); });
}

bool PiecewiseFunction::is_zero() const {
  return std::all_of(pieces_.begin(), pieces_.end(),
                     [](const Coefficient& c) { return c.is_constant() && c.constant() == 0.0; });
}

double PiecewiseFunction::piece_lo(std::size_t i) const {
  return i == 0 ? -std::numeric_limits<double>::infinity() : breaks_[i - 1];
}

double PiecewiseFunction::piece_hi(std::size_t i) const {
  return i == breaks_.size() ? std::numeric_limits<double>::infinity() : breaks_[i];
}

// ---------------------------------------------------------------------------

PiecewiseDiffusion::PiecewiseDiffusion(std::vector<double> breaks, std::vector<Coefficient> a,
                                       std::vector<Coefficient> rho, std::vector<Coefficient> b)
    : a_(breaks, std::move(a)), rho_(breaks, std::move(rho)), b_(std::move(breaks), std::move(b)) {}

PiecewiseDiffusion::PiecewiseDiffusion(PiecewiseFunction a, PiecewiseFunction rho, PiecewiseFunction b)
    : a_(std::move(a)), rho_(std::move(rho)), b_(std::move(b)) {}

PiecewiseDiffusion PiecewiseDiffusion::brownian() { return piecewise_constant({}, {1.0}, {1.0}, {0.0}); }

PiecewiseDiffusion PiecewiseDiffusion::piecewise_constant(std::vector<double> breaks, std::vector<double> a,
                                                          std::vector<double> rho, std::vector<double> b) {
  auto wrap = [](const std::vector<double>& v) { return std::vector<Coefficient>(v.begin(), v.end()); };
  return PiecewiseDiffusion(std::move(breaks), wrap(a), wrap(rho), wrap(b));
}

PiecewiseDiffusion PiecewiseDiffusion::skew_brownian(const SkewParameter& skew) {
  const double am = 1.0 - skew.alpha();
  const double ap = skew.alpha();
  if (am <= 0.0 || ap <= 0.0)
    throw DomainError("skew_brownian coefficients require alpha in (0,1), got " + format_value(skew.alpha()));
  return piecewise_constant({0.0}, {am, ap}, {1.0 / am, 1.0 / ap}, {0.0, 0.0});
}

PiecewiseDiffusion PiecewiseDiffusion::with_drift(PiecewiseFunction b) {
  const std::vector<double> br = b.breaks();
  std::vector<Coefficient> ones(br.size() + 1, Coefficient(1.0));
  return PiecewiseDiffusion(PiecewiseFunction(br, ones), PiecewiseFunction(br, ones), std::move(b));
}

bool PiecewiseDiffusion::is_piecewise_constant() const {
  return a_.is_piecewise_constant() && rho_.is_piecewise_constant();
}

PiecewiseDiffusion validate_piecewise(const PiecewiseDiffusion& coeffs) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  double drift_hi = 0.0;
  constexpr int kProbes = 257;
  constexpr double kWindow = 64.0;

  auto probe = [&](const PiecewiseFunction& fn, const char* name, bool positive) {
    for (std::size_t i = 0; i < fn.pieces().size(); ++i) {
      const Coefficient& c = fn.pieces()[i];
      auto check = [&](double x, double v) {
        if (!std::isfinite(v))
          throw DomainError(std::string("validate_piecewise: non-finite ") + name + " at x = " + format_value(x));
        if (positive) {
          if (!(v > 0.0))
            throw DomainError(std::string("validate_piecewise: ellipticity violated, ") + name + "(" +
                              format_value(x) + ") = " + format_value(v));
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        } else {
          drift_hi = std::max(drift_hi, std::abs(v));
        }
      };
      if (c.is_constant()) {
        check(fn.piece_lo(i), c.constant());
        continue;
      }
      double a = fn.piece_lo(i);
      double b = fn.piece_hi(i);
      if (!std::isfinite(a)) a = (std::isfinite(b) ? b : 0.0) - kWindow;
      if (!std::isfinite(b)) b = a + 2.0 * kWindow;
      for (int k = 0; k < kProbes; ++k) {
        // Stay strictly inside the half-open piece.
        const double x = a + (b - a) * (static_cast<double>(k) + 0.5) / kProbes;
        check(x, c(x));
      }
      check(a, c(a));
    }
  };
  probe(coeffs.a(), "a", true);
  probe(coeffs.rho(), "rho", true);
  probe(coeffs.b(), "b", false);

  PiecewiseDiffusion out = coeffs;
  out.bounds_ = EllipticityBounds{lo, std::max(hi, drift_hi)};
  return out;
}

// ---------------------------------------------------------------------------

SignedAtomicMeasure::SignedAtomicMeasure(std::map<double, double> atoms, std::optional<ContinuousDensity> continuous)
    : atoms_(std::move(atoms)), continuous_(std::move(continuous)) {
  for (const auto& [x, w] : atoms_) {
    if (!std::isfinite(x)) throw DomainError("signed measure: non-finite atom location");
    if (!(std::abs(w) < 1.0))
      throw DomainError("signed measure: atom at " + format_value(x) + " has weight " + format_value(w) +
                        " outside (-1, 1)");
  }
  if (continuous_) {
    if (!continuous_->density) throw DomainError("signed measure: empty continuous density");
    if (!(continuous_->lo < continuous_->hi) || !std::isfinite(continuous_->lo) || !std::isfinite(continuous_->hi))
      throw DomainError("signed measure: continuous part needs a finite support [lo, hi]");
  }
}

SignedAtomicMeasure SignedAtomicMeasure::dirac(double location, double weight) {
  return SignedAtomicMeasure(std::map<double, double>{{location, weight}});
}

double SignedAtomicMeasure::continuous_mass_below(double x) const {
  if (!continuous_) return 0.0;
  const double hi = std::min(x, continuous_->hi);
  if (hi <= continuous_->lo) return 0.0;
  return numerics::integrate(continuous_->density, continuous_->lo, hi, 1e-14);
}

double SignedAtomicMeasure::continuous_density(double x) const {
  if (!continuous_ || x < continuous_->lo || x > continuous_->hi) return 0.0;
  return continuous_->density(x);
}

// ---------------------------------------------------------------------------

SampledPath::SampledPath(double t0, double dt, std::vector<double> values)
    : t0_(t0), dt_(dt), values_(std::move(values)) {
  if (!(dt > 0.0)) throw DomainError("sampled path: dt must be positive, got " + format_value(dt));
}

SampledPath::SampledPath(std::vector<double> times, std::vector<double> values, bool skeleton)
    : times_(std::move(times)), values_(std::move(values)), skeleton_(skeleton) {
  if (times_.size() != values_.size()) throw DomainError("sampled path: times and values differ in length");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw DomainError("sampled path: event times must be strictly increasing");
  if (!times_.empty()) t0_ = times_.front();
}

void SampledPath::set_noise(std::vector<double> noise) {
  if (noise.size() + 1 != values_.size())
    throw DomainError("sampled path: noise record must hold one increment per step");
  noise_ = std::move(noise);
}

// ---------------------------------------------------------------------------

namespace numerics {
namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 21>;

double adapt(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
  double err = 0.0;
  const double value = GK::integrate(f, a, b, 0, 0.0, &err);
  if (err <= tol || std::abs(b - a) < 1e-15 * std::max(1.0, std::abs(a))) return value;
  if (depth <= 0)
    throw NumericalError("quadrature did not converge on [" + format_value(a) + ", " + format_value(b) +
                         "], error estimate " + format_value(err));
  const double m = 0.5 * (a + b);
  return adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  if (a > b) return -integrate(f, b, a, abs_tol, max_depth);
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("integrate: limits must be finite");
  return adapt(f, a, b, abs_tol, max_depth);
}

double integrate_split(const std::function<double(double)>& f, double a, double b, std::span<const double> splits,
                       double abs_tol) {
  std::vector<double> knots{a};
  for (double s : splits)
    if (s > a && s < b) knots.push_back(s);
  knots.push_back(b);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  const double per = abs_tol / static_cast<double>(knots.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) total += integrate(f, knots[i], knots[i + 1], per);
  return total;
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double x_tol, const std::string& what) {
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw NumericalError(what + ": root not bracketed in [" + format_value(lo) + ", " + format_value(hi) + "]");
  std::uintmax_t max_iter = 200;
  auto tol = [x_tol](double a, double b) { return std::abs(b - a) <= x_tol; };
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, max_iter);
  if (!tol(a, b)) throw NumericalError(what + ": root finder exhausted its iteration budget");
  return 0.5 * (a + b);
}

}  // namespace numerics
}  // namespace skewsim
