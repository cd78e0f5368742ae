#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "skewsim/core.hpp"
#include "skewsim/rng.hpp"
#include "skewsim/transform.hpp"

namespace skewsim {

/// Integer-valued step law used when the walk sits at 0 (bounded support).
struct ZeroStepLaw {
  std::vector<int> values;
  std::vector<double> probabilities;

  /// E[Z+] / E[|Z|].
  double effective_alpha() const;
  int draw(double u) const;
};

struct WalkSpec {
  int n = 100;
  double T = 1.0;
  SkewParameter alpha;
  double x0 = 0.0;
  std::optional<ZeroStepLaw> zero_step_law;

  std::int64_t start_index() const;
  std::uint64_t steps() const;
};

/// Throws DomainError for n < 1, T <= 0, x0 off the 1/n lattice or an invalid zero-step law.
void validate_walk_spec(const WalkSpec& spec);

/// Lattice skew walk in integer units.
///
/// Away from 0 the walk steps away from 0 iff a fair bit is 1, so |S| is driven by bits alone.
/// At 0 one uniform U is drawn and the walk moves to +1 iff U < alpha (or to Z under a zero-step law).
/// With this convention |S| does not depend on alpha for a fixed stream.
class SkewWalk {
 public:
  explicit SkewWalk(const WalkSpec& spec);
  /// Signs at 0 come from `sign_stream` instead (excursion-flip construction: reflected walk plus
  /// an independent Bernoulli(alpha) sign per excursion).
  SkewWalk(const WalkSpec& spec, RngStream sign_stream);

  std::int64_t position() const { return pos_; }
  std::uint64_t time() const { return time_; }

  void step(RngStream& rng);
  /// Advances min(limit, |S|, 64) steps at once (one step from 0); the chunk never crosses 0.
  /// Returns the number of steps taken. Equivalent in law and in bit consumption to single steps.
  std::uint64_t advance(std::uint64_t limit, RngStream& rng);

 private:
  void leave_zero(RngStream& rng);

  double alpha_;
  std::optional<ZeroStepLaw> law_;
  std::optional<RngStream> sign_stream_;
  std::int64_t pos_ = 0;
  std::uint64_t time_ = 0;
};

/// Path of X^n_t = S_{n^2 t}/n on the grid t_k = k/n^2 (linear interpolation in between).
SampledPath gen_random_walk(const WalkSpec& spec, RngStream& rng);

/// Terminal lattice index S_{n^2 T} with the same draws as gen_random_walk, without path storage.
std::int64_t walk_terminal_index(const WalkSpec& spec, RngStream& rng);
/// Terminal lattice index of the excursion-flip walk (same draws as gen_excursion_flip).
std::int64_t excursion_flip_terminal_index(int n, double T, const SkewParameter& alpha, RngStream& rng);

/// Reflected walk with an independent sign per excursion, drawn from rng.child(1).
SampledPath gen_excursion_flip(int n, double T, const SkewParameter& alpha, RngStream& rng);

/// Euler-Maruyama on Y = F_nu(X), which carries no local-time term; returns X = F_nu^{-1}(Y) on the
/// grid k dt with the Gaussian increments recorded. Two calls with copies of one stream share noise.
SampledPath gen_euler(const SkewSDE& sde, double dt, double T, double x0, RngStream& rng);
SampledPath gen_euler(const PiecewiseDiffusion& coeffs, double dt, double T, double x0, RngStream& rng);

/// Euler state machine for the SBM (sigma = 1, no drift), usable without storing paths.
class SkewEulerStepper {
 public:
  SkewEulerStepper(const SkewSDE& sde, double dt);

  double to_y(double x) const;
  double to_x(double y) const;
  /// One step in Y coordinates driven by the increment dB.
  double step(double y, double dB) const;
  double dt() const { return dt_; }

 private:
  LeGallFunction legall_;
  SkewSDE sde_;
  double dt_;
  double sqdt_;
  // Piecewise-constant coefficients in Y coordinates when available.
  bool table_ = false;
  std::vector<double> ybreaks_;
  std::vector<double> ydiff_;
  std::vector<double> ydrift_;
};

/// X_T from the stepper with the same draws as gen_euler.
double euler_terminal(const SkewEulerStepper& stepper, double T, double x0, RngStream& rng);

struct FollowLeaderPath {
  SampledPath x;
  SampledPath local_time;
};

/// Follow-the-leader construction with micro-step delta: T^1 advances when B^2 > gamma B^1,
/// otherwise T^2; X = (gamma U^1 - Z^2) - (U^1 - Z^1), L = (1 + gamma) U^1.
FollowLeaderPath gen_follow_leader(double delta, double T, const SkewParameter& alpha, RngStream& rng);

/// Terminal value of the follow-the-leader construction at T (no path storage).
double follow_leader_terminal(double delta, double T, const SkewParameter& alpha, RngStream& rng);

/// Two walks driven by the same uniforms: away from 0 a walk moves up iff U < 1/2, at 0 walk i moves
/// up iff U < alpha_i. The lattice order S^1 <= S^2 is preserved.
std::pair<SampledPath, SampledPath> gen_coupled_walk_pair(const SkewParameter& alpha1, const SkewParameter& alpha2,
                                                          double x1, double x2, const WalkSpec& spec, RngStream& rng);

/// Value of a uniform-grid path at time t by linear interpolation.
double interpolate(const SampledPath& path, double t);

}  // namespace skewsim
