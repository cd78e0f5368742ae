#include "skewsim/exit_scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skewsim/killed_bm.hpp"
#include "skewsim/numerics.hpp"

namespace skewsim {
namespace {

constexpr std::uint64_t kMaxEvents = 2'000'000'000ULL;

// Smallest t with g(t) = target for an increasing g starting at 0.
template <typename G>
double invert_time(G&& g, double target, double L, std::optional<double> t_max) {
  double hi;
  if (t_max) {
    hi = *t_max;
  } else {
    hi = L * L;
    for (int i = 0; g(hi) <= target; ++i) {
      if (i > 200) throw NumericalError("exit time: bracket expansion failed");
      hi *= 2.0;
    }
  }
  return numerics::find_root([&](double t) { return g(t) - target; }, 0.0, hi, 1e-14 * L * L, "exit time inverse");
}

// Killed position y in (0, L) at time s given survival.
double killed_position(double s, double u, double L, double surv, double v) {
  const double target = v * surv;
  return numerics::find_root([&](double y) { return killed::killed_cdf(s, u, y, L) - target; }, 0.0, L, 1e-13 * L,
                             "killed position inverse");
}

void check_horizon(std::optional<double> t_max) {
  if (t_max && !(*t_max > 0.0)) throw DomainError("exit sample: horizon must be positive, got " + format_value(*t_max));
}

}  // namespace

IntervalExit interval_exit_sample(double h, const SkewParameter& alpha, std::optional<double> t_max, RngStream& rng) {
  if (!(h > 0.0)) throw DomainError("interval exit: half-width must be positive, got " + format_value(h));
  check_horizon(t_max);
  const double L = 2.0 * h;
  const double a = alpha.alpha();
  auto exited = [&](double t) { return 1.0 - killed::survival(t, h, L); };
  const double u = rng.uniform();
  const double reach = t_max ? exited(*t_max) : 1.0;
  const double p_right = a * reach;
  const double p_left = (1.0 - a) * reach;
  if (u < p_right) {
    const double t = invert_time([&](double s) { return a * exited(s); }, u, L, t_max);
    return {true, t, +1, h};
  }
  if (u < p_right + p_left) {
    const double t = invert_time([&](double s) { return (1.0 - a) * exited(s); }, u - p_right, L, t_max);
    return {true, t, -1, -h};
  }
  const double surv = 1.0 - reach;
  const double y = killed_position(*t_max, h, L, surv, rng.uniform());
  const double m = std::abs(y - h);
  const double sign = rng.uniform() < a ? 1.0 : -1.0;
  return {false, *t_max, 0, sign * m};
}

IntervalExit brownian_interval_sample(double lo, double x, double hi, std::optional<double> t_max, RngStream& rng) {
  if (!(lo < x && x < hi))
    throw DomainError("interval exit: start " + format_value(x) + " outside (" + format_value(lo) + ", " + format_value(hi) + ")");
  check_horizon(t_max);
  const double L = hi - lo;
  const double ux = x - lo;
  auto right = [&](double t) { return killed::right_exit_cdf(t, ux, L); };
  auto left = [&](double t) { return killed::left_exit_cdf(t, ux, L); };
  const double u = rng.uniform();
  const double p_right = t_max ? right(*t_max) : ux / L;
  const double p_left = t_max ? left(*t_max) : 1.0 - ux / L;
  if (u < p_right) return {true, invert_time(right, u, L, t_max), +1, hi};
  if (u < p_right + p_left || !t_max) return {true, invert_time(left, std::max(u - p_right, 0.0), L, t_max), -1, lo};
  const double surv = std::max(0.0, 1.0 - p_right - p_left);
  const double y = killed_position(*t_max, ux, L, surv, rng.uniform());
  return {false, *t_max, 0, lo + y};
}

// ---------------------------------------------------------------------------
// ExitGrid

ExitGrid::ExitGrid(std::vector<double> points, const std::vector<SkewPoint>& skew_points) : points_(std::move(points)) {
  if (points_.size() < 2) throw DomainError("exit grid: need at least two points");
  for (std::size_t i = 1; i < points_.size(); ++i)
    if (!(points_[i] > points_[i - 1])) throw DomainError("exit grid: points must be strictly ascending");
  alpha_.assign(points_.size(), std::numeric_limits<double>::quiet_NaN());
  for (const SkewPoint& p : skew_points) {
    const auto it = std::lower_bound(points_.begin(), points_.end(), p.y - 1e-12 * std::max(1.0, std::abs(p.y)));
    if (it == points_.end() || std::abs(*it - p.y) > 1e-12 * std::max(1.0, std::abs(p.y)))
      throw DomainError("exit grid: skew point " + format_value(p.y) + " is not a grid point");
    const auto i = static_cast<std::size_t>(it - points_.begin());
    if (i == 0 || i + 1 == points_.size())
      throw DomainError("exit grid: skew point " + format_value(p.y) + " must be an interior grid point");
    const double dl = points_[i] - points_[i - 1];
    const double dr = points_[i + 1] - points_[i];
    if (std::abs(dl - dr) > 1e-12 * std::max(dl, dr))
      throw DomainError("exit grid: neighbours of skew point " + format_value(p.y) + " are not symmetric (" +
                        format_value(dl) + " vs " + format_value(dr) + ")");
    points_[i] = p.y;
    alpha_[i] = p.alpha();
  }
}

ExitGrid ExitGrid::build(const BrownianReduction& reduction, double lo, double hi, double step) {
  if (!(hi > lo) || !(step > 0.0)) throw DomainError("exit grid: need lo < hi and a positive step");
  const auto k = static_cast<std::int64_t>(std::llround((hi - lo) / step));
  std::vector<double> pts;
  for (std::int64_t i = 0; i <= k; ++i) {
    const double p = lo + step * static_cast<double>(i);
    bool keep = true;
    for (const SkewPoint& s : reduction.skew_points)
      if (std::abs(p - s.y) < step * (1.0 - 1e-9)) keep = false;
    if (keep) pts.push_back(p);
  }
  for (const SkewPoint& s : reduction.skew_points) {
    pts.push_back(s.y - 0.5 * step);
    pts.push_back(s.y);
    pts.push_back(s.y + 0.5 * step);
  }
  std::sort(pts.begin(), pts.end());
  return ExitGrid(std::move(pts), reduction.skew_points);
}

double ExitGrid::point(std::int64_t i) const {
  const auto n = static_cast<std::int64_t>(points_.size());
  if (i < 0) return points_[0] + static_cast<double>(i) * (points_[1] - points_[0]);
  if (i >= n) return points_[n - 1] + static_cast<double>(i - n + 1) * (points_[n - 1] - points_[n - 2]);
  return points_[static_cast<std::size_t>(i)];
}

std::int64_t ExitGrid::index_of(double y) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(y));
  const auto it = std::lower_bound(points_.begin(), points_.end(), y - tol);
  if (it != points_.end() && std::abs(*it - y) <= tol) return it - points_.begin();
  throw DomainError("exit grid: " + format_value(y) + " is not a grid point");
}

std::optional<double> ExitGrid::skew_alpha(std::int64_t i) const {
  if (i < 0 || i >= static_cast<std::int64_t>(points_.size())) return std::nullopt;
  const double a = alpha_[static_cast<std::size_t>(i)];
  if (std::isnan(a)) return std::nullopt;
  return a;
}

// ---------------------------------------------------------------------------
// SkeletonPath

SkeletonPath SkeletonPath::to_original(const BrownianReduction& reduction) const {
  SkeletonPath out = *this;
  for (double& p : out.positions) p = reduction.to_original(p);
  if (out.terminal_value) out.terminal_value = reduction.to_original(*out.terminal_value);
  return out;
}

SampledPath SkeletonPath::to_sampled() const {
  std::vector<double> ts = times;
  std::vector<double> vs = positions;
  if (terminal_time && (ts.empty() || *terminal_time > ts.back())) {
    ts.push_back(*terminal_time);
    vs.push_back(*terminal_value);
  }
  return SampledPath(std::move(ts), std::move(vs), true);
}

double SkeletonPath::plot_value(double t) const {
  const SampledPath p = to_sampled();
  if (t <= p.time(0)) return p.value(0);
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (t <= p.time(i)) {
      const double w = (t - p.time(i - 1)) / (p.time(i) - p.time(i - 1));
      return (1.0 - w) * p.value(i - 1) + w * p.value(i);
    }
  }
  return p.terminal_value();
}

namespace {

bool stopped(const StopRule& stop, double y) {
  return (stop.lower && y <= *stop.lower) || (stop.upper && y >= *stop.upper);
}

void check_run(double T, const StopRule& stop, const char* what) {
  if (std::isnan(T) || !(T > 0.0)) throw DomainError(std::string(what) + ": horizon must be positive");
  if (std::isinf(T) && !stop.lower && !stop.upper)
    throw DomainError(std::string(what) + ": an infinite horizon needs a stop rule");
}

}  // namespace

SkeletonPath gen_scheme_C(const BrownianReduction& reduction, const ExitGrid& grid, double T, double x0,
                          RngStream& rng, const StopRule& stop) {
  (void)reduction;
  check_run(T, stop, "scheme C");
  std::int64_t i = grid.index_of(x0);
  SkeletonPath path;
  double t = 0.0;
  double y = grid.point(i);
  path.times.push_back(t);
  path.positions.push_back(y);
  for (std::uint64_t events = 0; !stopped(stop, y); ++events) {
    if (events > kMaxEvents) throw NumericalError("scheme C: event budget exhausted");
    const double lo = grid.point(i - 1);
    const double hi = grid.point(i + 1);
    const std::optional<double> remaining = std::isinf(T) ? std::nullopt : std::optional<double>(T - t);
    IntervalExit ev;
    if (const auto a = grid.skew_alpha(i)) {
      ev = interval_exit_sample(y - lo, skew_from_alpha(*a), remaining, rng);
      if (!ev.exited) ev.position += y;
    } else {
      ev = brownian_interval_sample(lo, y, hi, remaining, rng);
    }
    if (!ev.exited) {
      path.terminal_time = T;
      path.terminal_value = ev.position;
      return path;
    }
    t += ev.time;
    i += ev.side;
    y = grid.point(i);
    path.times.push_back(t);
    path.positions.push_back(y);
  }
  return path;
}

// ---------------------------------------------------------------------------
// Scheme E

SchemeE::SchemeE(const PiecewiseDiffusion& coeffs, std::vector<double> grid)
    : model_(ScaleSpeedModel::build(coeffs)), grid_(std::move(grid)) {
  if (grid_.size() < 2) throw DomainError("scheme E: need at least two grid points");
  for (std::size_t i = 1; i < grid_.size(); ++i)
    if (!(grid_[i] > grid_[i - 1])) throw DomainError("scheme E: grid must be strictly ascending");
  for (std::size_t i = 0; i < grid_.size(); ++i) nodes_.push_back(compute(static_cast<std::int64_t>(i)));
}

double SchemeE::point(std::int64_t i) const {
  const auto n = static_cast<std::int64_t>(grid_.size());
  if (i < 0) return grid_[0] + static_cast<double>(i) * (grid_[1] - grid_[0]);
  if (i >= n) return grid_[n - 1] + static_cast<double>(i - n + 1) * (grid_[n - 1] - grid_[n - 2]);
  return grid_[static_cast<std::size_t>(i)];
}

std::int64_t SchemeE::index_of(double x) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  const auto it = std::lower_bound(grid_.begin(), grid_.end(), x - tol);
  if (it != grid_.end() && std::abs(*it - x) <= tol) return it - grid_.begin();
  throw DomainError("scheme E: " + format_value(x) + " is not a grid point");
}

SchemeE::Node SchemeE::compute(std::int64_t i) const {
  const double lo = point(i - 1);
  const double x = point(i);
  const double hi = point(i + 1);
  const ExitMoments r = exit_time_moments(model_, x, lo, hi, ExitSide::right);
  const ExitMoments l = exit_time_moments(model_, x, lo, hi, ExitSide::left);
  return Node{r.side_probability, *r.conditional, *l.conditional};
}

SchemeE::Node SchemeE::node(std::int64_t i) const {
  if (i >= 0 && i < static_cast<std::int64_t>(nodes_.size())) return nodes_[static_cast<std::size_t>(i)];
  return compute(i);
}

SkeletonPath SchemeE::run(double T, double x0, RngStream& rng, const StopRule& stop) const {
  check_run(T, stop, "scheme E");
  std::int64_t i = index_of(x0);
  SkeletonPath path;
  double t = 0.0;
  double x = point(i);
  path.times.push_back(t);
  path.positions.push_back(x);
  for (std::uint64_t events = 0; !stopped(stop, x); ++events) {
    if (events > kMaxEvents) throw NumericalError("scheme E: event budget exhausted");
    const Node nd = node(i);
    const bool up = rng.uniform() < nd.p_right;
    const double dt = up ? nd.t_right : nd.t_left;
    if (t + dt > T) {
      path.terminal_time = T;
      path.terminal_value = x;
      return path;
    }
    t += dt;
    i += up ? 1 : -1;
    x = point(i);
    path.times.push_back(t);
    path.positions.push_back(x);
  }
  return path;
}

SkeletonPath gen_scheme_E(const PiecewiseDiffusion& coeffs, const std::vector<double>& grid, double T, double x0,
                          RngStream& rng, const StopRule& stop) {
  return SchemeE(coeffs, grid).run(T, x0, rng, stop);
}

}  // namespace skewsim
