#include "skewsim/generators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace skewsim {
namespace {

std::uint64_t grid_steps(double T, double dt, const char* what) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError(std::string(what) + ": horizon must be positive, got " + format_value(T));
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError(std::string(what) + ": step must be positive, got " + format_value(dt));
  const double ratio = T / dt;
  if (ratio > 4e9) throw DomainError(std::string(what) + ": step count overflow (" + format_value(ratio) + " steps)");
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio) || n < 1.0)
    throw DomainError(std::string(what) + ": horizon " + format_value(T) + " is not a multiple of the step " + format_value(dt));
  return static_cast<std::uint64_t>(n);
}

}  // namespace

// ---------------------------------------------------------------------------
// Walk specification

double ZeroStepLaw::effective_alpha() const {
  double pos = 0.0;
  double abs = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    pos += probabilities[i] * std::max(values[i], 0);
    abs += probabilities[i] * std::abs(values[i]);
  }
  return pos / abs;
}

int ZeroStepLaw::draw(double u) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return values[i];
  }
  return values.back();
}

std::int64_t WalkSpec::start_index() const { return std::llround(x0 * n); }

std::uint64_t WalkSpec::steps() const {
  return grid_steps(T, 1.0 / (static_cast<double>(n) * n), "random walk");
}

void validate_walk_spec(const WalkSpec& spec) {
  if (spec.n < 1) throw DomainError("random walk: n must be >= 1, got " + std::to_string(spec.n));
  spec.steps();
  const double scaled = spec.x0 * spec.n;
  if (!std::isfinite(scaled) || std::abs(scaled - std::round(scaled)) > 1e-9 * std::max(1.0, std::abs(scaled)))
    throw DomainError("random walk: x0 = " + format_value(spec.x0) + " is not on the 1/n grid");
  if (spec.zero_step_law) {
    const auto& law = *spec.zero_step_law;
    if (law.values.empty() || law.values.size() != law.probabilities.size())
      throw DomainError("zero-step law: values and probabilities must be non-empty and of equal length");
    double total = 0.0;
    double abs = 0.0;
    for (std::size_t i = 0; i < law.values.size(); ++i) {
      if (!(law.probabilities[i] >= 0.0)) throw DomainError("zero-step law: negative probability " + format_value(law.probabilities[i]));
      total += law.probabilities[i];
      abs += law.probabilities[i] * std::abs(law.values[i]);
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("zero-step law: probabilities sum to " + format_value(total));
    if (!(abs > 0.0)) throw DomainError("zero-step law: E|Z| must be positive");
  }
}

// ---------------------------------------------------------------------------
// SkewWalk

SkewWalk::SkewWalk(const WalkSpec& spec)
    : alpha_(spec.alpha.alpha()), law_(spec.zero_step_law), pos_(spec.start_index()) {
  validate_walk_spec(spec);
}

SkewWalk::SkewWalk(const WalkSpec& spec, RngStream sign_stream) : SkewWalk(spec) {
  if (law_) throw DomainError("excursion flip: a zero-step law is not supported");
  sign_stream_ = std::move(sign_stream);
}

void SkewWalk::leave_zero(RngStream& rng) {
  if (law_) {
    pos_ = law_->draw(rng.uniform());
  } else if (sign_stream_) {
    pos_ = sign_stream_->uniform() < alpha_ ? 1 : -1;
  } else {
    pos_ = rng.uniform() < alpha_ ? 1 : -1;
  }
}

void SkewWalk::step(RngStream& rng) {
  ++time_;
  if (pos_ == 0) {
    leave_zero(rng);
    return;
  }
  const std::int64_t sign = pos_ > 0 ? 1 : -1;
  pos_ += rng.bit() ? sign : -sign;
}

std::uint64_t SkewWalk::advance(std::uint64_t limit, RngStream& rng) {
  if (pos_ == 0 || limit <= 1) {
    step(rng);
    return 1;
  }
  const std::uint64_t radius = static_cast<std::uint64_t>(pos_ > 0 ? pos_ : -pos_);
  const int m = static_cast<int>(std::min<std::uint64_t>({limit, radius, 64}));
  const auto away = static_cast<std::int64_t>(std::popcount(rng.bits(m)));
  const std::int64_t move = 2 * away - m;
  pos_ += pos_ > 0 ? move : -move;
  time_ += static_cast<std::uint64_t>(m);
  return static_cast<std::uint64_t>(m);
}

SampledPath gen_random_walk(const WalkSpec& spec, RngStream& rng) {
  SkewWalk walk(spec);
  const std::uint64_t steps = spec.steps();
  const double nd = static_cast<double>(spec.n);
  std::vector<double> values(steps + 1);
  values[0] = static_cast<double>(walk.position()) / nd;
  for (std::uint64_t k = 1; k <= steps; ++k) {
    walk.step(rng);
    values[k] = static_cast<double>(walk.position()) / nd;
  }
  return SampledPath(0.0, 1.0 / (nd * nd), std::move(values));
}

SampledPath gen_excursion_flip(int n, double T, const SkewParameter& alpha, RngStream& rng) {
  WalkSpec spec;
  spec.n = n;
  spec.T = T;
  spec.alpha = alpha;
  SkewWalk walk(spec, rng.child(1));
  const std::uint64_t steps = spec.steps();
  const double nd = static_cast<double>(n);
  std::vector<double> values(steps + 1, 0.0);
  for (std::uint64_t k = 1; k <= steps; ++k) {
    walk.step(rng);
    values[k] = static_cast<double>(walk.position()) / nd;
  }
  return SampledPath(0.0, 1.0 / (nd * nd), std::move(values));
}

std::int64_t walk_terminal_index(const WalkSpec& spec, RngStream& rng) {
  SkewWalk walk(spec);
  const std::uint64_t steps = spec.steps();
  while (walk.time() < steps) walk.advance(steps - walk.time(), rng);
  return walk.position();
}

std::int64_t excursion_flip_terminal_index(int n, double T, const SkewParameter& alpha, RngStream& rng) {
  WalkSpec spec;
  spec.n = n;
  spec.T = T;
  spec.alpha = alpha;
  SkewWalk walk(spec, rng.child(1));
  const std::uint64_t steps = spec.steps();
  while (walk.time() < steps) walk.advance(steps - walk.time(), rng);
  return walk.position();
}

// ---------------------------------------------------------------------------
// Euler scheme

SkewEulerStepper::SkewEulerStepper(const SkewSDE& sde, double dt)
    : legall_(sde.nu), sde_(sde), dt_(dt), sqdt_(std::sqrt(dt)) {
  if (!(dt > 0.0)) throw DomainError("euler: step must be positive, got " + format_value(dt));
  if (!legall_.linear_form() || !sde.sigma.is_piecewise_constant() || !sde.drift.is_piecewise_constant()) return;
  std::vector<double> xb = sde.sigma.breaks();
  xb.insert(xb.end(), sde.drift.breaks().begin(), sde.drift.breaks().end());
  for (const auto& [x, w] : sde.nu.atoms()) xb.push_back(x);
  std::sort(xb.begin(), xb.end());
  xb.erase(std::unique(xb.begin(), xb.end()), xb.end());
  for (std::size_t i = 0; i <= xb.size(); ++i) {
    double probe;
    if (xb.empty()) probe = 0.0;
    else if (i == 0) probe = xb.front() - 1.0;
    else if (i == xb.size()) probe = xb.back() + 1.0;
    else probe = 0.5 * (xb[i - 1] + xb[i]);
    const double f = legall_.f(probe);
    ydiff_.push_back(f * sde.sigma(probe));
    ydrift_.push_back(f * sde.drift(probe));
  }
  for (double x : xb) ybreaks_.push_back(legall_.F(x));
  table_ = true;
}

double SkewEulerStepper::to_y(double x) const { return legall_.F(x); }
double SkewEulerStepper::to_x(double y) const { return legall_.F_inverse(y); }

double SkewEulerStepper::step(double y, double dB) const {
  if (table_) {
    const auto i = static_cast<std::size_t>(std::upper_bound(ybreaks_.begin(), ybreaks_.end(), y) - ybreaks_.begin());
    return y + ydiff_[i] * dB + ydrift_[i] * dt_;
  }
  const double x = legall_.F_inverse(y);
  const double f = legall_.f(x);
  return y + f * sde_.sigma(x) * dB + f * sde_.drift(x) * dt_;
}

SampledPath gen_euler(const SkewSDE& sde, double dt, double T, double x0, RngStream& rng) {
  const std::uint64_t steps = grid_steps(T, dt, "euler");
  const SkewEulerStepper stepper(sde, dt);
  const double sq = std::sqrt(dt);
  std::vector<double> values(steps + 1);
  std::vector<double> noise(steps);
  double y = stepper.to_y(x0);
  values[0] = x0;
  for (std::uint64_t k = 0; k < steps; ++k) {
    const double dB = sq * rng.normal();
    noise[k] = dB;
    y = stepper.step(y, dB);
    if (!std::isfinite(y)) throw NumericalError("euler: state overflow at step " + std::to_string(k));
    values[k + 1] = stepper.to_x(y);
  }
  SampledPath path(0.0, dt, std::move(values));
  path.set_noise(std::move(noise));
  return path;
}

double euler_terminal(const SkewEulerStepper& stepper, double T, double x0, RngStream& rng) {
  const std::uint64_t steps = grid_steps(T, stepper.dt(), "euler");
  const double sq = std::sqrt(stepper.dt());
  double y = stepper.to_y(x0);
  for (std::uint64_t k = 0; k < steps; ++k) y = stepper.step(y, sq * rng.normal());
  if (!std::isfinite(y)) throw NumericalError("euler: state overflow");
  return stepper.to_x(y);
}

SampledPath gen_euler(const PiecewiseDiffusion& coeffs, double dt, double T, double x0, RngStream& rng) {
  return gen_euler(sde_from_divergence(coeffs), dt, T, x0, rng);
}

// ---------------------------------------------------------------------------
// Follow the leader

namespace {

struct LeaderState {
  double gamma;
  double sq;
  double b1 = 0.0;
  double b2 = 0.0;
  double u1 = 0.0;

  void step(RngStream& rng) {
    if (b2 > gamma * b1) {
      b1 += sq * rng.normal();
      u1 = std::max(u1, b1);
    } else {
      b2 += sq * rng.normal();
    }
  }
  double x() const { return (gamma * u1 - b2) - (u1 - b1); }
  double local_time() const { return (1.0 + gamma) * u1; }
};

LeaderState leader_state(double delta, const SkewParameter& alpha) {
  if (!(alpha.alpha() > 0.0 && alpha.alpha() < 1.0))
    throw DomainError("follow the leader: alpha must lie strictly inside (0,1), got " + format_value(alpha.alpha()));
  return LeaderState{(1.0 + alpha.beta()) / (1.0 - alpha.beta()), std::sqrt(delta)};
}

}  // namespace

FollowLeaderPath gen_follow_leader(double delta, double T, const SkewParameter& alpha, RngStream& rng) {
  const std::uint64_t steps = grid_steps(T, delta, "follow the leader");
  LeaderState st = leader_state(delta, alpha);
  std::vector<double> xs(steps + 1, 0.0);
  std::vector<double> ls(steps + 1, 0.0);
  for (std::uint64_t k = 1; k <= steps; ++k) {
    st.step(rng);
    xs[k] = st.x();
    ls[k] = st.local_time();
  }
  return {SampledPath(0.0, delta, std::move(xs)), SampledPath(0.0, delta, std::move(ls))};
}

double follow_leader_terminal(double delta, double T, const SkewParameter& alpha, RngStream& rng) {
  const std::uint64_t steps = grid_steps(T, delta, "follow the leader");
  LeaderState st = leader_state(delta, alpha);
  for (std::uint64_t k = 0; k < steps; ++k) st.step(rng);
  return st.x();
}

// ---------------------------------------------------------------------------
// Coupled walks

std::pair<SampledPath, SampledPath> gen_coupled_walk_pair(const SkewParameter& alpha1, const SkewParameter& alpha2,
                                                          double x1, double x2, const WalkSpec& spec, RngStream& rng) {
  WalkSpec s1 = spec;
  s1.x0 = x1;
  WalkSpec s2 = spec;
  s2.x0 = x2;
  validate_walk_spec(s1);
  validate_walk_spec(s2);
  if (alpha1.alpha() > alpha2.alpha())
    throw DomainError("coupled walks: need alpha1 <= alpha2, got " + format_value(alpha1.alpha()) + " > " +
                      format_value(alpha2.alpha()));
  std::int64_t p1 = s1.start_index();
  std::int64_t p2 = s2.start_index();
  if (p1 > p2) throw DomainError("coupled walks: need x1 <= x2");
  if ((p2 - p1) % 2 != 0) throw DomainError("coupled walks: starting points have different lattice parity");
  const std::uint64_t steps = spec.steps();
  const double nd = static_cast<double>(spec.n);
  std::vector<double> v1(steps + 1);
  std::vector<double> v2(steps + 1);
  v1[0] = static_cast<double>(p1) / nd;
  v2[0] = static_cast<double>(p2) / nd;
  const double a1 = alpha1.alpha();
  const double a2 = alpha2.alpha();
  for (std::uint64_t k = 1; k <= steps; ++k) {
    const double u = rng.uniform();
    p1 += (u < (p1 == 0 ? a1 : 0.5)) ? 1 : -1;
    p2 += (u < (p2 == 0 ? a2 : 0.5)) ? 1 : -1;
    v1[k] = static_cast<double>(p1) / nd;
    v2[k] = static_cast<double>(p2) / nd;
  }
  return {SampledPath(0.0, 1.0 / (nd * nd), std::move(v1)), SampledPath(0.0, 1.0 / (nd * nd), std::move(v2))};
}

double interpolate(const SampledPath& path, double t) {
  if (!path.uniform()) throw DomainError("interpolate: path is not on a uniform grid");
  const double s = (t - path.t0()) / path.dt();
  if (s <= 0.0) return path.value(0);
  const auto k = static_cast<std::size_t>(std::floor(s));
  if (k + 1 >= path.size()) return path.terminal_value();
  const double w = s - static_cast<double>(k);
  return (1.0 - w) * path.value(k) + w * path.value(k + 1);
}

}  // namespace skewsim
