#include "skewsim/transform.hpp"

#include <algorithm>
#include <cmath>

#include "skewsim/numerics.hpp"
#include "skewsim/scale_speed.hpp"

namespace skewsim {

// ---------------------------------------------------------------------------
// PiecewiseLinearMap

PiecewiseLinearMap::PiecewiseLinearMap(std::vector<double> breaks, std::vector<double> slopes)
    : breaks_(std::move(breaks)), slopes_(std::move(slopes)) {
  if (slopes_.size() != breaks_.size() + 1) throw DomainError("piecewise-linear map: need one slope per piece");
  for (std::size_t i = 0; i < breaks_.size(); ++i)
    if (i > 0 && !(breaks_[i] > breaks_[i - 1])) throw DomainError("piecewise-linear map: breakpoints not ascending");
  for (double s : slopes_)
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("piecewise-linear map: slope must be positive, got " + format_value(s));
  build();
}

void PiecewiseLinearMap::build() {
  const std::size_t n = breaks_.size();
  images_.assign(n, 0.0);
  if (n == 0) return;
  const auto p0 = static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), 0.0) - breaks_.begin());
  if (p0 < n) {
    images_[p0] = slopes_[p0] * breaks_[p0];
    for (std::size_t j = p0 + 1; j < n; ++j) images_[j] = images_[j - 1] + slopes_[j] * (breaks_[j] - breaks_[j - 1]);
  }
  if (p0 > 0) {
    images_[p0 - 1] = slopes_[p0] * breaks_[p0 - 1];
    for (std::size_t j = p0 - 1; j-- > 0;) images_[j] = images_[j + 1] - slopes_[j + 1] * (breaks_[j + 1] - breaks_[j]);
  }
}

double PiecewiseLinearMap::operator()(double x) const {
  if (breaks_.empty()) return slopes_[0] * x;
  const auto i = static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin());
  if (i < breaks_.size()) return images_[i] + slopes_[i] * (x - breaks_[i]);
  return images_.back() + slopes_.back() * (x - breaks_.back());
}

double PiecewiseLinearMap::inverse(double y) const {
  if (breaks_.empty()) return y / slopes_[0];
  const auto i = static_cast<std::size_t>(std::upper_bound(images_.begin(), images_.end(), y) - images_.begin());
  if (i < breaks_.size()) return breaks_[i] + (y - images_[i]) / slopes_[i];
  return breaks_.back() + (y - images_.back()) / slopes_.back();
}

double PiecewiseLinearMap::slope(double x) const {
  return slopes_[static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin())];
}

double PiecewiseLinearMap::slope_left(double x) const {
  return slopes_[static_cast<std::size_t>(std::lower_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin())];
}

// ---------------------------------------------------------------------------
// SDE with local time

SkewSDE make_skew_sde(PiecewiseFunction sigma, PiecewiseFunction drift, SignedAtomicMeasure nu) {
  for (std::size_t i = 0; i < sigma.pieces().size(); ++i) {
    const auto& c = sigma.pieces()[i];
    if (c.is_constant() && !(c.constant() > 0.0))
      throw DomainError("skew SDE: ellipticity violated, sigma = " + format_value(c.constant()));
  }
  return SkewSDE{std::move(sigma), std::move(drift), std::move(nu)};
}

SkewSDE skew_brownian_sde(const SkewParameter& skew) {
  if (std::abs(skew.beta()) >= 1.0)
    throw DomainError("skew SDE: |beta| must be < 1 for the local-time weight, got " + format_value(skew.beta()));
  return make_skew_sde(PiecewiseFunction(1.0), PiecewiseFunction(0.0), SignedAtomicMeasure::dirac(0.0, skew.beta()));
}

// ---------------------------------------------------------------------------
// Le Gall function

LeGallFunction::LeGallFunction(SignedAtomicMeasure nu) : nu_(std::move(nu)) {
  double prod = 1.0;
  for (const auto& [x, w] : nu_.atoms()) {
    atom_x_.push_back(x);
    prod *= (1.0 - w) / (1.0 + w);
    atom_prod_.push_back(prod);
  }
  if (!nu_.continuous_part()) {
    std::vector<double> slopes{1.0};
    slopes.insert(slopes.end(), atom_prod_.begin(), atom_prod_.end());
    linear_ = PiecewiseLinearMap(atom_x_, std::move(slopes));
    return;
  }
  knots_ = atom_x_;
  knots_.push_back(0.0);
  knots_.push_back(nu_.continuous_part()->lo);
  knots_.push_back(nu_.continuous_part()->hi);
  std::sort(knots_.begin(), knots_.end());
  knots_.erase(std::unique(knots_.begin(), knots_.end()), knots_.end());
  knot_F_.assign(knots_.size(), 0.0);
  const auto anchor = static_cast<std::size_t>(std::find(knots_.begin(), knots_.end(), 0.0) - knots_.begin());
  auto fn = [this](double x) { return f(x); };
  for (std::size_t j = anchor + 1; j < knots_.size(); ++j)
    knot_F_[j] = knot_F_[j - 1] + numerics::integrate(fn, knots_[j - 1], knots_[j], 1e-14);
  for (std::size_t j = anchor; j-- > 0;)
    knot_F_[j] = knot_F_[j + 1] - numerics::integrate(fn, knots_[j], knots_[j + 1], 1e-14);
}

double LeGallFunction::atomic_factor(double x, bool inclusive) const {
  const auto it = inclusive ? std::upper_bound(atom_x_.begin(), atom_x_.end(), x)
                            : std::lower_bound(atom_x_.begin(), atom_x_.end(), x);
  const auto k = static_cast<std::size_t>(it - atom_x_.begin());
  return k == 0 ? 1.0 : atom_prod_[k - 1];
}

double LeGallFunction::continuous_factor(double x) const {
  if (!nu_.continuous_part()) return 1.0;
  return std::exp(-2.0 * nu_.continuous_mass_below(x));
}

double LeGallFunction::f(double x) const { return continuous_factor(x) * atomic_factor(x, true); }
double LeGallFunction::f_left(double x) const { return continuous_factor(x) * atomic_factor(x, false); }

double LeGallFunction::f_prime_continuous(double x) const {
  if (!nu_.continuous_part()) return 0.0;
  return -2.0 * nu_.continuous_density(x) * f(x);
}

double LeGallFunction::F(double x) const {
  if (linear_) return (*linear_)(x);
  std::size_t ref = 0;
  if (x >= knots_.front())
    ref = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), x) - knots_.begin()) - 1;
  return knot_F_[ref] + numerics::integrate([this](double z) { return f(z); }, knots_[ref], x, 1e-14);
}

double LeGallFunction::F_inverse(double y) const {
  if (linear_) return linear_->inverse(y);
  double lo = -1.0;
  double hi = 1.0;
  while (F(lo) > y) lo *= 2.0;
  while (F(hi) < y) hi *= 2.0;
  return numerics::find_root([&](double x) { return F(x) - y; }, lo, hi, 1e-13 * std::max(1.0, std::abs(y)),
                             "F_nu inverse");
}

LeGallFunction legall_function(const SignedAtomicMeasure& nu) { return LeGallFunction(nu); }

SignedAtomicMeasure recover_measure(const std::function<double(double)>& f, const std::function<double(double)>& f_left,
                                    std::span<const double> jump_points,
                                    std::optional<std::pair<double, double>> support, double h) {
  std::map<double, double> atoms;
  for (double x : jump_points) {
    const double fr = f(x);
    const double fl = f_left(x);
    const double w = -(fr - fl) / (fr + fl);
    if (std::abs(w) > 1e-15) atoms[x] = w;
  }
  std::optional<ContinuousDensity> continuous;
  if (support) {
    auto density = [f, h](double x) {
      const double d = (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
      return -d / (2.0 * f(x));
    };
    continuous = ContinuousDensity{density, support->first, support->second};
  }
  return SignedAtomicMeasure(std::move(atoms), std::move(continuous));
}

SignedAtomicMeasure push_forward_measure(const SignedAtomicMeasure& nu, const PiecewiseLinearMap& map) {
  if (nu.continuous_part()) throw DomainError("push_forward_measure: only purely atomic measures are supported");
  std::vector<double> points = map.breaks();
  for (const auto& [x, w] : nu.atoms()) points.push_back(x);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  std::map<double, double> atoms;
  for (double x : points) {
    const auto it = nu.atoms().find(x);
    const double w = it == nu.atoms().end() ? 0.0 : it->second;
    const double fp = map.slope(x);
    const double fm = map.slope_left(x);
    const double mu = ((fp + fm) * w + fp - fm) / (fp * (1.0 + w) + fm * (1.0 - w));
    if (mu != 0.0) atoms[map(x)] = mu;
  }
  return SignedAtomicMeasure(std::move(atoms));
}

SkewSDE sde_from_divergence(const PiecewiseDiffusion& input) {
  const PiecewiseDiffusion coeffs = validate_piecewise(input);
  const auto& breaks = coeffs.breaks();
  std::vector<Coefficient> sigma;
  std::vector<Coefficient> drift;
  for (std::size_t i = 0; i < coeffs.piece_count(); ++i) {
    const Coefficient a = coeffs.a().pieces()[i];
    const Coefficient rho = coeffs.rho().pieces()[i];
    const Coefficient b = coeffs.b().pieces()[i];
    if (a.is_constant() && rho.is_constant()) {
      sigma.emplace_back(std::sqrt(a.constant() * rho.constant()));
    } else {
      sigma.emplace_back(std::function<double(double)>([a, rho](double x) { return std::sqrt(a(x) * rho(x)); }));
    }
    if (a.is_constant()) {
      drift.push_back(b);
    } else {
      drift.emplace_back(std::function<double(double)>([a, rho, b](double x) {
        const double step = 1e-5 * std::max(1.0, std::abs(x));
        const double da = (a(x + step) - a(x - step)) / (2.0 * step);
        return 0.5 * da * rho(x) + b(x);
      }));
    }
  }
  std::map<double, double> atoms;
  for (double x : breaks) {
    const double ap = coeffs.a()(x);
    const double am = coeffs.a().left_limit(x);
    if (ap != am) atoms[x] = (ap - am) / (ap + am);
  }
  return SkewSDE{PiecewiseFunction(breaks, std::move(sigma)), PiecewiseFunction(breaks, std::move(drift)),
                 SignedAtomicMeasure(std::move(atoms))};
}

// ---------------------------------------------------------------------------
// Brownian reduction

namespace {

BrownianReduction reduce_piecewise_constant(const PiecewiseDiffusion& coeffs) {
  const auto& breaks = coeffs.breaks();
  std::vector<double> slopes;
  for (std::size_t i = 0; i < coeffs.piece_count(); ++i) {
    const double a = coeffs.a().pieces()[i].constant();
    const double rho = coeffs.rho().pieces()[i].constant();
    slopes.push_back(1.0 / std::sqrt(a * rho));
  }
  BrownianReduction out{PiecewiseLinearMap(breaks, slopes), {}, coeffs, 0, false};
  for (double x : breaks) {
    const double rp = std::sqrt(coeffs.a()(x) / coeffs.rho()(x));
    const double rm = std::sqrt(coeffs.a().left_limit(x) / coeffs.rho().left_limit(x));
    const double beta = (rp - rm) / (rp + rm);
    if (std::abs(beta) > 1e-15) out.skew_points.push_back(SkewPoint{x, out.G(x), beta});
  }
  return out;
}

}  // namespace

BrownianReduction brownian_reduction(const PiecewiseDiffusion& input, const ReductionOptions& options) {
  const PiecewiseDiffusion coeffs = validate_piecewise(input);
  if (coeffs.is_drift_free()) {
    if (!coeffs.is_piecewise_constant())
      throw DomainError("brownian_reduction: coefficients a and rho must be piecewise constant");
    return reduce_piecewise_constant(coeffs);
  }
  if (!options.remove_drift)
    throw DomainError("brownian_reduction: non-zero drift requires drift removal (remove_drift = true)");
  if (!(options.cell > 0.0)) throw DomainError("brownian_reduction: cell width must be positive");

  // Drift window: explicit localisation or the finite support of the non-zero drift pieces.
  const auto& bfun = coeffs.b();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool localized = false;
  if (options.window > 0.0) {
    lo = -options.window;
    hi = options.window;
    localized = true;
  } else {
    for (std::size_t i = 0; i < bfun.pieces().size(); ++i) {
      const auto& c = bfun.pieces()[i];
      if (c.is_constant() && c.constant() == 0.0) continue;
      if (!std::isfinite(bfun.piece_lo(i)) || !std::isfinite(bfun.piece_hi(i)))
        throw DomainError("brownian_reduction: drift is not integrable; set a localisation window");
      lo = std::min(lo, bfun.piece_lo(i));
      hi = std::max(hi, bfun.piece_hi(i));
    }
  }

  // Localised coefficients: drift switched off outside [lo, hi].
  std::vector<double> breaks = coeffs.breaks();
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<Coefficient> la;
  std::vector<Coefficient> lrho;
  std::vector<Coefficient> lb;
  const PiecewiseFunction tmp(breaks, std::vector<Coefficient>(breaks.size() + 1, Coefficient(0.0)));
  for (std::size_t i = 0; i <= breaks.size(); ++i) {
    const double plo = tmp.piece_lo(i);
    const double phi = tmp.piece_hi(i);
    const double probe = std::isfinite(plo) ? plo : phi - 1.0;
    const std::size_t src = coeffs.piece_index(probe);
    la.push_back(coeffs.a().pieces()[src]);
    lrho.push_back(coeffs.rho().pieces()[src]);
    const bool inside = plo >= lo && phi <= hi;
    lb.push_back(inside ? coeffs.b().pieces()[src] : Coefficient(0.0));
  }
  const PiecewiseDiffusion local(breaks, la, lrho, lb);
  const ScaleSpeedModel model = ScaleSpeedModel::build(local);

  // Cell grid over the window, merged with the coefficient breakpoints.
  const auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / options.cell));
  std::vector<double> grid = breaks;
  for (std::size_t k = 0; k <= cells; ++k) grid.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(cells));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(), [](double p, double q) { return std::abs(p - q) < 1e-12; }), grid.end());

  std::vector<double> mids;
  for (std::size_t i = 0; i <= grid.size(); ++i) {
    if (i == 0) mids.push_back(grid.front() - 1.0);
    else if (i == grid.size()) mids.push_back(grid.back() + 1.0);
    else mids.push_back(0.5 * (grid[i - 1] + grid[i]));
  }

  // Zvonkin sign: the folded coefficients must keep the scale function up to a constant,
  // i.e. S'_folded / S' = exp(-s h) / exp(-h) must not vary.
  int sign = 0;
  for (int s : {+1, -1}) {
    double rmin = std::numeric_limits<double>::infinity();
    double rmax = 0.0;
    for (double m : mids) {
      const double folded = 1.0 / (local.a()(m) * std::exp(s * model.h(m)));
      const double ratio = folded / model.scale_derivative(m);
      rmin = std::min(rmin, ratio);
      rmax = std::max(rmax, ratio);
    }
    if (rmax - rmin <= 1e-9 * rmax) {
      sign = s;
      break;
    }
  }
  if (sign == 0) throw NumericalError("brownian_reduction: neither Zvonkin sign preserves the scale function");

  std::vector<double> a_cells;
  std::vector<double> rho_cells;
  for (double m : mids) {
    const std::size_t src = local.piece_index(m);
    const bool flat = local.a().pieces()[src].is_constant() && local.rho().pieces()[src].is_constant();
    if (!flat && (m < lo || m > hi))
      throw DomainError("brownian_reduction: evaluator coefficients outside the drift window are not piecewise constant");
    const double hm = model.h(m);
    a_cells.push_back(local.a()(m) * std::exp(sign * hm));
    rho_cells.push_back(local.rho()(m) * std::exp(-sign * hm));
  }
  std::vector<double> zero(a_cells.size(), 0.0);
  BrownianReduction out = reduce_piecewise_constant(
      validate_piecewise(PiecewiseDiffusion::piecewise_constant(grid, a_cells, rho_cells, zero)));
  out.zvonkin_sign = sign;
  out.localized = localized;
  return out;
}

double reduction_scale_mismatch(const PiecewiseDiffusion& coeffs, const BrownianReduction& reduction) {
  const ScaleSpeedModel model = ScaleSpeedModel::build(coeffs);
  double worst = 0.0;
  const auto& ybreaks = reduction.skew_points;
  for (std::size_t k = 0; k < ybreaks.size(); ++k) {
    const SkewPoint& p = ybreaks[k];
    double gap = 1.0;
    if (k > 0) gap = std::min(gap, p.y - ybreaks[k - 1].y);
    if (k + 1 < ybreaks.size()) gap = std::min(gap, ybreaks[k + 1].y - p.y);
    const double d = 0.25 * gap;
    auto sy = [&](double y) { return model.scale(reduction.to_original(y)); };
    const double right = (sy(p.y + d) - sy(p.y)) / d;
    const double left = (sy(p.y) - sy(p.y - d)) / d;
    const double alpha = p.alpha();
    worst = std::max(worst, std::abs(right / left - (1.0 - alpha) / alpha));
  }
  return worst;
}

}  // namespace skewsim
